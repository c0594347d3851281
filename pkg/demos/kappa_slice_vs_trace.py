"""Tracing versus slicing the in-hole momentum.

Photons leave each mask hole with a spread of transverse momentum kappa. When
the VV amplitude picks up a phase linear in kappa, coincidence counting (which
integrates over kappa) sees a mixed polarization state. A narrowband seed
selects one kappa bin and sees a pure one. Path is untouched either way.
"""

from dataclasses import replace

from settomo.linalg import partial_trace, project_subsystems
from settomo.metrics import concurrence, purity
from settomo.states import KAPPA, PATH, POL, SourceConfig, calibrate_phase_gradient, hyper_state_kappa

cfg = SourceConfig(kappa_bins=21)

# %% Purity of the traced polarization state as the phase gradient grows.
for alpha in (0.0, 1.0, 2.0, 3.0, 5.0):
    s = hyper_state_kappa(replace(cfg, kappa_phase_gradient=alpha))
    print(f"alpha = {alpha:.1f}: Tr(rho_pol^2) = {purity(partial_trace(s, POL)):.4f}")

# %% Pick the gradient that reproduces a traced purity of 0.772.
alpha = calibrate_phase_gradient(0.772, cfg)
full = hyper_state_kappa(replace(cfg, kappa_phase_gradient=alpha))
traced = partial_trace(full, POL)
print(f"\ncalibrated alpha = {alpha:.4f} rad per aperture")
print(f"traced:  purity {purity(traced):.4f}, |rho_HH,VV| = {abs(traced.matrix[0, 3]):.4f}, "
      f"C = {concurrence(traced):.4f}")

# %% Project both kappa subsystems onto the central bin instead.
centre = cfg.kappa_bins // 2
sliced = partial_trace(project_subsystems(full, {KAPPA[0]: centre, KAPPA[1]: centre}), POL)
print(f"sliced:  purity {purity(sliced):.4f}, C = {concurrence(sliced):.4f}")

# %% Path does not care.
print(f"path purity, traced: {purity(partial_trace(full, PATH)):.6f}")
