/*
 * Binary search tree over a fixed node pool. A node index of -1 is null.
 * repOK() is the representation-invariant oracle used by the tester.
 */

#define POOL_SIZE 64
#define STACK_SIZE 129
#define MIN_KEY (-1000000)
#define MAX_KEY 1000000

int node_value[POOL_SIZE];
int node_left[POOL_SIZE];
int node_right[POOL_SIZE];
int root = -1;
int tree_size = 0;
int next_node = 0;

int new_node(int x)
{
    int n = next_node;
    next_node = next_node + 1;
    node_value[n] = x;
    node_left[n] = -1;
    node_right[n] = -1;
    tree_size = tree_size + 1;
    return n;
}

void add(int x)
{
    int current = root;
    if (root == -1) {
        root = new_node(x);
        return;
    }
    while (node_value[current] != x) {
        if (x < node_value[current]) {
            if (node_left[current] == -1) {
                node_left[current] = new_node(x);
                return;
            } else {
                current = node_left[current];
            }
        } else {
            if (node_right[current] == -1) {
                node_right[current] = new_node(x);
                return;
            } else {
                current = node_right[current];
            }
        }
    }
}

int find(int x)
{
    int current = root;
    if (root == -1) {
        return 0;
    }
    while (node_value[current] != x) {
        if (x < node_value[current]) {
            if (node_left[current] == -1) {
                return 0;
            } else {
                current = node_left[current];
            }
        } else {
            if (node_right[current] == -1) {
                return 0;
            } else {
                current = node_right[current];
            }
        }
    }
    return 1;
}

void removeNode(int node, int parent)
{
    int succ;
    int succ_parent;
    int child;
    if (node_left[node] != -1 && node_right[node] != -1) {
        succ_parent = node;
        succ = node_right[node];
        while (node_left[succ] != -1) {
            succ_parent = succ;
            succ = node_left[succ];
        }
        node_value[node] = node_value[succ];
        if (succ_parent == node) {
            node_right[succ_parent] = node_right[succ];
        } else {
            node_left[succ_parent] = node_right[succ];
        }
        tree_size = tree_size - 1;
        return;
    }
    if (node_right[node] == -1) {
        child = node_left[node];
        if (parent == -1) {
            root = child;
        } else if (node_left[parent] == node) {
            node_left[parent] = child;
        } else {
            node_right[parent] = child;
        }
    } else {
        child = node_right[node];
        if (parent == -1) {
            root = child;
        } else if (node_left[parent] == node) {
            node_left[parent] = child;
        } else {
            node_right[parent] = child;
        }
    }
    tree_size = tree_size - 1;
}

void remove(int x)
{
    int parent = -1;
    int current = root;
    if (root == -1) {
        return;
    }
    while (node_value[current] != x) {
        parent = current;
        if (x < node_value[current]) {
            if (node_left[current] == -1) {
                return;
            } else {
                current = node_left[current];
            }
        } else {
            if (node_right[current] == -1) {
                return;
            } else {
                current = node_right[current];
            }
        }
    }
    removeNode(current, parent);
}

int repOK(void)
{
    int stack[STACK_SIZE];
    int lo[STACK_SIZE];
    int hi[STACK_SIZE];
    int seen[POOL_SIZE];
    int top;
    int count = 0;
    int n;
    int n_lo;
    int n_hi;
    int i;
    for (i = 0; i < next_node; i++) {
        seen[i] = 0;
    }
    if (root == -1) {
        return tree_size == 0;
    }
    stack[0] = root;
    lo[0] = MIN_KEY;
    hi[0] = MAX_KEY;
    top = 1;
    while (top > 0) {
        top = top - 1;
        n = stack[top];
        n_lo = lo[top];
        n_hi = hi[top];
        if (n < 0 || n >= next_node) {
            return 0;
        }
        if (seen[n]) {
            return 0;
        }
        seen[n] = 1;
        count = count + 1;
        if (node_value[n] <= n_lo || node_value[n] >= n_hi) {
            return 0;
        }
        if (node_left[n] != -1) {
            stack[top] = node_left[n];
            lo[top] = n_lo;
            hi[top] = node_value[n];
            top = top + 1;
        }
        if (node_right[n] != -1) {
            stack[top] = node_right[n];
            lo[top] = node_value[n];
            hi[top] = n_hi;
            top = top + 1;
        }
    }
    return count == tree_size;
}
