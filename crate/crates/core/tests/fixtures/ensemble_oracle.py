"""Reference value of the 2-broadcasting fidelity of {1/2 |0>, 1/2 |+>}.

For pure members the fidelity with the first clone's marginal is
sqrt(<psi| Lambda_1(psi) |psi>), a concave function of the Choi matrix, so
the optimum is found directly without fidelity blocks:

    maximize   sum_i p_i sqrt(tr(J (psi_i^T (x) psi_i (x) I)))
    subject to J >= 0, tr_{A1 A2} J = I, J invariant under swapping A1, A2

with J on A (x) A1 (x) A2 and Lambda(X) = tr_A(J (X^T (x) I)).
Run: python3 ensemble_oracle.py > ensemble_oracle.json
"""

import json

import cvxpy as cp
import numpy as np

d = 2
members = [
    (0.5, np.array([1.0, 0.0])),
    (0.5, np.array([1.0, 1.0]) / np.sqrt(2.0)),
]

I2 = np.eye(2)
swap = np.zeros((4, 4))
for a in range(2):
    for b in range(2):
        swap[2 * b + a, 2 * a + b] = 1.0
W = np.kron(I2, swap)

J = cp.Variable((8, 8), hermitian=True)
constraints = [J >> 0, cp.partial_trace(J, [2, 4], axis=1) == I2, W @ J @ W.T == J]
terms = []
for p, psi in members:
    proj = np.outer(psi, psi.conj())
    weight = np.kron(np.kron(proj.T, proj), I2)
    terms.append(p * cp.sqrt(cp.real(cp.trace(J @ weight))))
problem = cp.Problem(cp.Maximize(sum(terms)), constraints)
problem.solve(solver=cp.CLARABEL)

print(json.dumps({
    "ensemble": "{1/2 |0>, 1/2 |+>}",
    "n": 2,
    "g": problem.value,
    "solver": "cvxpy/clarabel",
    "status": problem.status,
}, indent=2))
