/* Compiled as C: the public header must stay valid C. */
#include <stdio.h>
#include <string.h>

#include "apnorm/apnorm.h"

int main(void) {
  apn_modulus* m = NULL;
  apn_phase* f = NULL;
  apn_phase* g = NULL;
  apn_spectrum* s = NULL;
  apn_norm n;
  int failures = 0;
  if (apn_modulus_power(0.5, &m) != APN_OK) ++failures;
  if (apn_phase_linear(2, 0.0, &f) != APN_OK) ++failures;
  if (apn_spectrum_compute(f, 8.0, 0, APN_ENGINE_AUTO, &s) != APN_OK) ++failures;
  if (apn_ap_norm(s, 1.0, &n) != APN_OK || n.lo != 1.0 || n.hi != 1.0) ++failures;
  if (apn_phase_cantor(NULL, 6, &g) != APN_ERR_NULL_ARG || strlen(apn_last_error()) == 0) ++failures;
  apn_spectrum_free(s);
  apn_phase_free(f);
  apn_modulus_free(m);
  printf("%s\n", failures ? "FAIL" : "ok");
  return failures;
}
