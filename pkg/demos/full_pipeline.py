"""The whole comparison in one call, driven by the shipped configuration.

Equivalent to ``settomo run configs/default.json``. Takes about a minute and a
half because every column gets 200 bootstrap reconstructions; pass a smaller
``n_resamples`` for a quick look.
"""

import sys
from pathlib import Path

from settomo.pipeline import load_config, run

cfg = load_config(Path(__file__).resolve().parent.parent / "configs" / "default.json")
if len(sys.argv) > 1:
    cfg.n_resamples = int(sys.argv[1])
report = run(cfg)

print(f"phase gradient {report['source']['kappa_phase_gradient_rad']:.4f} rad\n")
cols = list(report["table"]["F"])
print(f"{'':10}" + "".join(f"{c:>20}" for c in cols))
for row, cells in report["table"].items():
    print(f"{row:10}" + "".join(f"{cells[c]['value']:>12.4f} +-{cells[c]['std']:.4f}" for c in cols))

print()
for name, rep in report["visibility"]["consistency"].items():
    print(f"{name}: compatible={rep['compatible']} (measured {rep['measured_purity']:.4f}, bound {rep['bound']:.4f})")
print("\n" + report["notes"][0])
print(f"\noutputs under {Path(cfg.outputs['report_path']).parent}/")
