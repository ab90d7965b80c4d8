/* Miscellaneous utilities. */

#define TABLE_SIZE 16

int table[TABLE_SIZE];

int external_hash(int x);
void *malloc(int n);

int call_extern(int x, int *out)
{
    out[0] = external_hash(x);
    return out[0];
}

char *buf_alloc(int n)
{
    char *p = malloc(n);
    assert(p != 0);
    p[0] = 0;
    return p;
}

float avg_float(float a, float b)
{
    assert(a >= 0);
    return (a + b) / 2;
}

int deep_loops(int *a, int n)
{
    int i, j, k, l;
    int s = 0;
    for (i = 0; i < n; i++)
        for (j = 0; j < n; j++)
            for (k = 0; k < n; k++)
                for (l = 0; l < n; l++)
                    s += a[l];
    return s;
}

void empty_fn(void)
{
}

int table_lookup(int i)
{
    assert(i >= 0 && i < TABLE_SIZE);
    return table[i];
}

int helper_user(const char *s, int n)
{
    assert(n >= 0);
    return str_count(s, n, 'a');
}
