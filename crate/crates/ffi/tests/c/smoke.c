#include <stdio.h>
#include "boxball.h"

int main(void) {
    int64_t init[9] = {1, 2, 4, 6, 7, 8, 11, 13, 16};
    int64_t want[9] = {5, 7, 12, 14, 17, 23, 24, 25, 26};
    int64_t pos[9];
    size_t needed = 0;
    BbSbbs *s = NULL;
    if (bb_sbbs_new(init, 9, 0, 1, 0, 1, 0, &s) != BB_STATUS_OK) return 1;
    if (bb_sbbs_step(s, 3) != BB_STATUS_OK) return 2;
    if (bb_sbbs_positions(s, pos, 9, &needed) != BB_STATUS_OK || needed != 9) return 3;
    for (int i = 0; i < 9; i++) {
        if (pos[i] != want[i]) return 4;
    }
    bb_sbbs_free(s);

    BbPartition *p = NULL;
    if (bb_partition_new(3, 0, 1, 2, &p) != BB_STATUS_OK) return 5;
    if (bb_partition_cells(p) != 4) return 6;
    int certified = 0;
    if (bb_partition_scertify(p, &certified) != BB_STATUS_OK || certified != 1) return 7;
    bb_partition_free(p);

    int64_t bad[2] = {2, 1};
    if (bb_sbbs_new(bad, 2, 1, 2, 0, 1, 0, &s) != BB_STATUS_INVALID_CONFIG) return 8;
    if (bb_last_error() == NULL) return 9;
    printf("ok %s\n", bb_version());
    return 0;
}
