#include <math.h>
#include <stdio.h>
#include "weyllab.h"

int main(void) {
    double b[3] = {0.0, 0.5, -0.5};
    double a[2] = {1.0, 0.8};
    WeylJacobi *j = NULL;
    WeylMeasure *mu = NULL;
    WeylJacobi *rec = NULL;
    WeylComplex z = {0.1, 0.4}, m, f;
    double rb[3], ra[2];

    if (weyl_jacobi_new(b, a, 3, &j) != WEYL_STATUS_OK) return 1;
    if (weyl_jacobi_spectral_measure(j, &mu) != WEYL_STATUS_OK) return 2;
    if (weyl_jacobi_m_function(j, z, 0, &m) != WEYL_STATUS_OK) return 3;
    if (weyl_measure_stieltjes(mu, z, &f) != WEYL_STATUS_OK) return 4;
    if (fabs(m.re - f.re) > 1e-12 || fabs(m.im - f.im) > 1e-12) return 5;
    if (weyl_measure_strip(mu, WEYL_ROUTE_OP_RECURSION, 3, &rec) != WEYL_STATUS_OK) return 6;
    if (weyl_jacobi_coefficients(rec, rb, ra) != WEYL_STATUS_OK) return 7;
    for (int k = 0; k < 3; k++) if (fabs(rb[k] - b[k]) > 1e-9) return 8;
    if (weyl_measure_stieltjes(NULL, z, &f) != WEYL_STATUS_NULL_POINTER) return 9;
    if (weyl_last_error() == NULL) return 10;

    weyl_jacobi_free(rec);
    weyl_measure_free(mu);
    weyl_jacobi_free(j);
    printf("weyllab %s ok\n", weyl_version());
    return 0;
}
