/*
 Copyright 2026 gbsde contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
/* The public header must compile as C. */
#include <math.h>
#include <stdio.h>

#include "gbsde/gbsde.h"

int main(void) {
    gbsde_problem* p = NULL;
    gbsde_solution* s = NULL;
    double y0 = 0.0;
    if (gbsde_problem_create(0.5, 1.0, 1.0, 101, 0, 6.0, &p) != GBSDE_OK) return 1;
    if (gbsde_problem_set_payoff(p, "call", 0.0, 0.0) != GBSDE_OK) return 1;
    if (gbsde_solve(p, &s) != GBSDE_OK) return 1;
    if (gbsde_solution_y0(s, &y0) != GBSDE_OK) return 1;
    printf("y0 = %.6f\n", y0);
    gbsde_solution_free(s);
    gbsde_problem_free(p);
    return fabs(y0 - 0.3989) < 5e-3 ? 0 : 1;
}
