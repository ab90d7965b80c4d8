/* String and arithmetic helpers. */

typedef int jsint;
typedef unsigned short uint16;
typedef unsigned char uint8;
typedef uint16 jschar;

#define BMH_CHARSET_SIZE 256
#define BMH_PATLEN_MAX 255
#define BMH_BAD_PATTERN (-2)

jsint
js_BoyerMooreHorspool(const jschar *text, jsint textlen,
                      const jschar *pat, jsint patlen,
                      jsint start)
{
        jsint i, j, k, m;
        uint8 skip[BMH_CHARSET_SIZE];
        jschar c;

        JS_ASSERT(0 < patlen && patlen <= BMH_PATLEN_MAX);
        for (i = 0; i < BMH_CHARSET_SIZE; i++)
            skip[i] = (uint8)patlen;
        m = patlen - 1;
        for (i = 0; i < m; i++) {
            c = pat[i];
            if (c >= BMH_CHARSET_SIZE)
                return BMH_BAD_PATTERN;
            skip[c] = (uint8)(m - i);
        }
        for (k = start + m;
             k < textlen;
             k += ((c = text[k]) >= BMH_CHARSET_SIZE) ? patlen : skip[c]) {
            for (i = k, j = m; ; i--, j--) {
                if (j < 0)
                    return i + 1;
                if (text[i] != pat[j])
                    break;
            }
        }
        return -1;
}

int str_count(const char *s, int n, char ch)
{
    int i;
    int count = 0;
    for (i = 0; i < n; i++) {
        if (s[i] == ch)
            count++;
    }
    return count;
}

int min_int(int a, int b)
{
    if (a < b)
        return a;
    return b;
}

void clear_flag(int *p)
{
    *p = 0;
}

int checked_div(int a, int b)
{
    assert(b != 0);
    return a / b;
}
