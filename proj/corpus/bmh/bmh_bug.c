/*
 * Boyer-Moore-Horspool substring search, scaled down to a 4-symbol
 * alphabet so every input up to the small-model bounds can be enumerated.
 * bmh_post() is the functional oracle: it recomputes the answer by naive
 * search and compares.
 *
 * Seeded defect: the inner loop stops one comparison early (j <= 0).
 */

typedef int jsint;
typedef unsigned short uint16;
typedef unsigned char uint8;
typedef uint16 jschar;

#define BMH_CHARSET_SIZE 4
#define BMH_PATLEN_MAX 3
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
                if (j <= 0)
                    return i + 1;
                if (text[i] != pat[j])
                    break;
            }
        }
        return -1;
}

jsint
bmh_post(const jschar *text, jsint textlen,
         const jschar *pat, jsint patlen,
         jsint start, jsint result)
{
        jsint k, j, expect;
        expect = -1;
        for (k = start; k + patlen <= textlen; k++) {
            for (j = 0; j < patlen; j++) {
                if (text[k + j] != pat[j])
                    break;
            }
            if (j == patlen) {
                expect = k;
                break;
            }
        }
        return result == expect;
}
