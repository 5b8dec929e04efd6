"""Block variation against two majorants for d_n = 1/n^2 on multiples of 3.

The ratio to b5 stays flat while the ratio to b6 grows linearly in n.
"""

from gmseries import BetaSpec, ClassSpec, make_generator, membership_scan

seq = make_generator("remark6", {"r": 3})
grid = [2 ** j for j in range(4, 13)]

rbvs = membership_scan(seq, ClassSpec("RBVS(beta,r)", r=3, beta=BetaSpec("b5", c=2.0)), grid)
gm = membership_scan(seq, ClassSpec("GM(beta,r)", r=2, beta=BetaSpec("b6", c=2.0, horizon=1 << 17)), grid)

print(f"{'n':>6} {'RBVS(b5,3)':>12} {'GM(b6,2)':>12}")
for n, a, b in zip(grid, rbvs.ratios, gm.ratios):
    print(f"{n:>6} {a:>12.4f} {b:>12.2f}")
print(f"RBVS(b5,3): {rbvs.verdict}, slope {rbvs.trend_slope:.3f}")
print(f"GM(b6,2):   {gm.verdict}, slope {gm.trend_slope:.3f}")
