import numpy as np

from cancoh import CancohConfig, causal_wavecancoh, wavecancoh
from simulate import builtin_spec_appendix_c1, population_curve, simulate_mvlsw
from wavelets import build_system

T = 1024
SCALE = 2

spec = builtin_spec_appendix_c1()
realization = simulate_mvlsw(spec, T, build_system("haar", spec.num_scales), seed=7)
X, Y = realization.panel.X, realization.panel.Y

field = wavecancoh(X, Y, CancohConfig(scales=(SCALE,)))
truth = population_curve(spec, SCALE, T)
u = field.u
for name, mask in (("first half", u < 0.5), ("second half", u >= 0.5)):
    print(f"{name}: estimate {field.curve(SCALE)[mask].mean():.3f}, population {truth[mask].mean():.3f}")

point = field.point(SCALE, T // 4)
print("channel weights a:", np.round(point.a, 3))
print("channel weights b:", np.round(point.b, 3))

lagged = causal_wavecancoh(X, Y, 10, CancohConfig(scales=(SCALE,)))
print(f"lag 10 mean coherence: {lagged.curve(SCALE).mean():.3f}")
