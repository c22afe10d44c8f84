#include <math.h>
#include <stdio.h>
#include "chanmetric.h"

int main(void) {
    CmChannel *rot = NULL, *deph = NULL;
    CmFidelity f;
    if (cm_channel_rotation_x(0.3, &rot) != CM_STATUS_OK) return 1;
    if (cm_channel_dephasing(0.5, &deph) != CM_STATUS_OK) return 2;
    if (cm_fidelity(rot, deph, 1e-9, &f) != CM_STATUS_OK) return 3;
    if (fabs(f.fidelity - 0.8273456675) > 1e-8) return 4;
    if (cm_channel_dephasing(2.0, &deph) != CM_STATUS_INVALID_ARGUMENT) return 5;
    if (cm_last_error_message() == NULL) return 6;
    printf("%.10f %s\n", f.fidelity, cm_version());
    cm_channel_free(rot);
    cm_channel_free(deph);
    return 0;
}
