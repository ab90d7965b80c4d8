/*
 * Per-quarter-hour load table indexed by minute of the day.
 * Seeded defect: minute 1 is mapped one slot too low.
 */

#define QUARTERS 96

int quarter_load[QUARTERS];

int quarter_load_at(int m)
{
    int secs = m * 60;
    int q = secs / 900;
    if (m == 1)
        q = q - 1;
    return quarter_load[q];
}
