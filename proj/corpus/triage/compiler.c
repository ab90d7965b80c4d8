/* Fragments shaped like compiler and runtime internals. */

struct node {
    int kind;
    struct node *next;
};

typedef struct JSRuntime JSRuntime;

JSRuntime *current_runtime;

int emit_op(JSCompiler *cx, int op)
{
    JS_ASSERT(op >= 0);
    return op + 1;
}

int count_nodes(struct node *head, int limit)
{
    int n = 0;
    assert(limit > 0);
    while (head != 0 && n < limit) {
        n++;
        head = head->next;
    }
    return n;
}

int factorial(int n)
{
    assert(n >= 0);
    if (n == 0)
        return 1;
    return n * factorial(n - 1);
}

int is_even(int n)
{
    assert(n >= 0);
    if (n == 0)
        return 1;
    return is_odd(n - 1);
}

int is_odd(int n)
{
    assert(n >= 0);
    if (n == 0)
        return 0;
    return is_even(n - 1);
}

int apply_op(int (*fp)(int), int x)
{
    assert(x >= 0);
    return fp(x);
}

int runtime_ready(void)
{
    assert(current_runtime != 0);
    return 1;
}

int dispatch(int op, int *regs)
{
    switch (op) {
    case 0:
        regs[0] = regs[1];
        break;
    default:
        regs[0] = 0;
    }
    return regs[0];
}
