#include <math.h>
#include <stdio.h>
#include <string.h>

#include "pdml.h"

int main(void) {
    PdmlDetector *det = NULL;
    if (pdml_detector_new(PDML_DETECTOR_KIND_PDML, 11, &det) != PDML_STATUS_OK) {
        fprintf(stderr, "new: %s\n", pdml_last_error_message());
        return 1;
    }
    size_t n = pdml_detector_tap_count(det);
    double offs[11], re[11], im[11];
    if (n != 11 || pdml_detector_offsets(det, offs, n) != PDML_STATUS_OK) return 2;
    for (size_t i = 0; i < n; i++) {
        double r = 1.0 - fabs(offs[i] - 0.1);
        re[i] = r > 0 ? r : 0;
        im[i] = 0;
    }
    double d = -1;
    if (pdml_distortion(det, re, im, n, 1e-3, &d) != PDML_STATUS_OK || !(d < 1e-8)) return 3;

    PdmlDetector *bad = NULL;
    PdmlStatus s = pdml_detector_new(PDML_DETECTOR_KIND_PDML, 4, &bad);
    if (s != PDML_STATUS_CONFIG || strlen(pdml_last_error_message()) == 0) return 4;
    if (strcmp(pdml_status_name(s), "config") != 0) return 5;

    pdml_detector_free(det);
    pdml_detector_free(NULL);
    puts("ok");
    return 0;
}
