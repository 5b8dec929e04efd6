"""Cauchy gaps of the divergent cosine series against their explicit lower bound."""

from gmseries.experiments import run_remark5

rep = run_remark5("cos", n=50, M=5000)
row = rep.tables["gap"][0]
print(f"||S_{row['block_end']} - S_{row['block_start'] - 1}|| = {row['gap']:.6f}"
      f"  >= lower bound {row['lower_bound']:.6f}")
for g in rep.tables["growth"]:
    extra = f"  increment {g['increment']:.6f} vs predicted {g['predicted']:.6f}" if "increment" in g else ""
    print(f"M={g['M']:>7}  lower bound {g['lower_bound']:.6f}{extra}")
