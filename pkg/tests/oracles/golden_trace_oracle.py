"""Straight-line scalar oracle for the 5-sample golden trace.

Computes every intermediate quantity of the combined scheme for a tiny
configuration (2-tap window, first-order trig expansion, single block)
using nothing but plain Python floats and the math module.  No package
imports: this script is the independent reference the regression test
freezes its expected values from.

Run:  python tests/oracles/golden_trace_oracle.py
"""

import math
import pprint

# configuration (tiny size, production hyperparameters)
M = 2
P = 1
QF = 2 * P          # links per sample
ME = M * QF         # expanded length
N_BLOCKS = 1

MU_LIN = 0.1
DELTA_LIN = 1e-3
MU1 = 0.1           # l1 / zero-attractor branch step size
DELTA1 = 1e-3
MU2 = 0.1           # proportionate branch step size
DELTA2 = 1e-3
GAMMA = 1e-5
EPSILON = 1e-2
BETA = 0.99
ALPHA = 0.0
XI_PROP = 0.01
XI_VSS = 0.01
MU_C = 0.1
BETA_R = 0.9
A_INIT = 0.0
R_INIT = 1.0

THETA = 1.0 / (1.0 + math.exp(4.0))
ETA = 1.0 / (1.0 - 2.0 * THETA)

X = [0.5, -0.25, 0.125, 0.8, -0.6]
D = [0.3, -0.1, 0.2, 0.35, -0.2]


def sgn(w):
    if w > 0.0:
        return 1.0
    if w < 0.0:
        return -1.0
    return 0.0


def compute_trace():
    w_lin = [0.0] * M
    w1 = [0.0] * ME
    w2 = [0.0] * ME
    pow_d = pow_yl = pow_y1 = pow_e1 = 0.0
    a = A_INIT
    lam = ETA * (1.0 / (1.0 + math.exp(-a)) - THETA)
    r = R_INIT

    trace = []
    for n in range(len(X)):
        x0 = X[n]
        x1 = X[n - 1] if n >= 1 else 0.0

        # expanded vector, sample-major: links of x[n] then links of x[n-1]
        g = [
            math.sin(math.pi * x0), math.cos(math.pi * x0),
            math.sin(math.pi * x1), math.cos(math.pi * x1),
        ]

        # branch outputs with pre-update weights
        y_l = w_lin[0] * x0 + w_lin[1] * x1
        p1 = g[0] * w1[0] + g[1] * w1[1] + g[2] * w1[2] + g[3] * w1[3]
        p2 = g[0] * w2[0] + g[1] * w2[1] + g[2] * w2[2] + g[3] * w2[3]
        y_fl = lam * p1 + (1.0 - lam) * p2

        e = D[n] - y_l - y_fl
        e1 = D[n] - y_l - p1
        e2 = D[n] - y_l - p2

        # l1 branch: power estimates first, then variable step size
        pow_d = BETA * pow_d + (1.0 - BETA) * D[n] * D[n]
        pow_yl = BETA * pow_yl + (1.0 - BETA) * y_l * y_l
        pow_y1 = BETA * pow_y1 + (1.0 - BETA) * p1 * p1
        pow_e1 = BETA * pow_e1 + (1.0 - BETA) * e1 * e1
        mu_r = abs(1.0 - math.sqrt(abs(pow_d - pow_yl - pow_y1)) / (pow_e1 + XI_VSS))
        gamma_r = EPSILON * GAMMA * mu_r

        # l1 branch weight update (proportionate + reweighted zero attractor)
        norm1 = sum(abs(w) for w in w1)
        q1 = [(1.0 - ALPHA) / (2.0 * ME)
              + (1.0 + ALPHA) * abs(w) / (2.0 * norm1 + XI_PROP) for w in w1]
        den1 = sum(q1[k] * g[k] * g[k] for k in range(ME)) + DELTA1
        w1 = [w1[k] + MU1 * q1[k] * g[k] * e1 / den1
              - gamma_r * sgn(w1[k]) / (1.0 + EPSILON * abs(w1[k]))
              for k in range(ME)]

        # proportionate branch weight update
        norm2 = sum(abs(w) for w in w2)
        q2 = [(1.0 - ALPHA) / (2.0 * ME)
              + (1.0 + ALPHA) * abs(w) / (2.0 * norm2 + XI_PROP) for w in w2]
        den2 = sum(q2[k] * g[k] * g[k] for k in range(ME)) + DELTA2
        w2 = [w2[k] + MU2 * q2[k] * g[k] * e2 / den2 for k in range(ME)]

        # linear branch update with the overall error
        xnorm = x0 * x0 + x1 * x1
        w_lin = [w_lin[0] + MU_LIN * x0 * e / (xnorm + DELTA_LIN),
                 w_lin[1] + MU_LIN * x1 * e / (xnorm + DELTA_LIN)]

        # mixing update: single block, delta = p1 - p2 with pre-update weights
        delta_blk = p1 - p2
        if r >= 1e-12:
            a = a + (MU_C / (ETA * r)) * e * delta_blk \
                * (lam + THETA * ETA) * (ETA - THETA * ETA - lam)
        a = min(4.0, max(-4.0, a))
        lam = ETA * (1.0 / (1.0 + math.exp(-a)) - THETA)
        lam = min(1.0, max(0.0, lam))
        r = BETA_R * r + (1.0 - BETA_R) * delta_blk * delta_blk

        trace.append({
            "y_l": y_l, "y_fl1": p1, "y_fl2": p2, "y_fl": y_fl,
            "e": e, "e_fl1": e1, "e_fl2": e2,
            "mu_r": mu_r, "a": a, "lam": lam, "r": r,
            "w_lin": list(w_lin), "w1": list(w1), "w2": list(w2),
        })

    return trace


if __name__ == "__main__":
    pprint.pprint(compute_trace(), width=100)
