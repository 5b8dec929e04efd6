"""||f - S_n|| for 1/n and 1/ln(n+2) next to |a_n| ln n."""

import math

from gmseries import make_generator, sn_f_gap

for label, seq in (("1/n", make_generator("harmonic")), ("1/ln(n+2)", make_generator("inv_log", {"shift": 2}))):
    print(label)
    for n in (16, 64, 256, 1024, 4096):
        rep = sn_f_gap(seq, "cos", n)
        print(f"  n={n:>5}  ||f - S_n|| = {rep.value:.6f} (+-{rep.error_estimate:.1e})"
              f"  |a_n| ln n = {abs(seq[n]) * math.log(n):.4f}")
