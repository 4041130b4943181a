# Exact enumeration of weighted walks on Z^2.
#
# Every walk gamma of length n gets weight
#   sigma(gamma) = prod_v exp(-phi(l_v)) * prod_steps rho(step)
# where l_v counts visits to vertex v.  Summing over all walks gives Z_n,
# over bridges H_n.  Both grow like exp(lambda_0 n), and the finite-n
# traces pin lambda_0 inside a bracket.

import numpy as np

from polymer_lab import Model, Potential, enumerate_all, kesten_partial_sum, lambda_bracket

# In[1]: three potentials on the nearest-neighbour lattice

models = {
    "free": Model.nearest_neighbor(Potential.free()),
    "saw": Model.nearest_neighbor(Potential.saw()),
    "weak k=1": Model.nearest_neighbor(Potential.weak(1.0)),
}

# In[2]: sums up to N = 10

N = 10
reports = {name: enumerate_all(m, N) for name, m in models.items()}

rep = reports["saw"]
print("SAW counts c_n (rho = 1/4, so multiply back):")
print(np.rint(rep.Z * 4.0 ** np.arange(N + 1)).astype(np.int64))

# In[3]: the bracket lower = max (1/n) log H_n <= lambda_0 <= min (1/n) log Z_n

for name, rep in reports.items():
    br = lambda_bracket(rep)
    print(f"{name:9s} lambda_0 in [{br.lower:+.4f}, {br.upper:+.4f}]")

# The free walk has Z_n = 1 exactly, so its upper end is 0.
# Self-avoidance costs mass: log(mu / 4) with mu ~ 2.638 is about -0.416,
# and the bracket closes in on it slowly.

# In[4]: Kesten partial sums at the upper end of the bracket

for name, rep in reports.items():
    br = lambda_bracket(rep)
    print(f"{name:9s} S_N(upper) = {kesten_partial_sum(rep, br.upper):.6f}")

# Partial sums stay below 1: irreducible bridges do not yet fill the
# renewal mass at this length.
