"""Regenerates the fixture state files. Run from this directory."""

import json

import numpy as np

S = 1 / np.sqrt(2)


def pairs(values):
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex).ravel()]


def density(dims, rho, decomposition=None):
    doc = {"dims": dims, "kind": "density", "entries": pairs(rho)}
    if decomposition is not None:
        weights, a_states, b_states = decomposition
        doc["decomposition"] = {
            "weights": [float(w) for w in weights],
            "a_states": [pairs(a) for a in a_states],
            "b_states": [pairs(b) for b in b_states],
        }
    return doc


def pure(dims, psi):
    return {"dims": dims, "kind": "pure", "entries": pairs(psi)}


def mixture(weights, a_states, b_states):
    rho = 0
    for w, a, b in zip(weights, a_states, b_states):
        v = np.kron(a, b)
        rho = rho + w * np.outer(v, v.conj())
    return rho


def separable(dims, weights, a_states, b_states):
    a_states = [np.asarray(a, dtype=complex) for a in a_states]
    b_states = [np.asarray(b, dtype=complex) for b in b_states]
    return density(dims, mixture(weights, a_states, b_states), (weights, a_states, b_states))


def _pair_list(values, per_line):
    items = [json.dumps(v) for v in values]
    lines = [", ".join(items[i:i + per_line]) for i in range(0, len(items), per_line)]
    return "[\n    " + ",\n    ".join(lines) + "\n  ]"


def write(name, doc):
    side = int(np.prod(doc["dims"]))
    parts = [f'"dims": {json.dumps(doc["dims"])}', f'"kind": "{doc["kind"]}"',
             f'"entries": {_pair_list(doc["entries"], side)}']
    if "decomposition" in doc:
        d = doc["decomposition"]
        parts.append('"decomposition": {\n    "weights": ' + json.dumps(d["weights"]) +
                     ',\n    "a_states": ' + json.dumps(d["a_states"]) +
                     ',\n    "b_states": ' + json.dumps(d["b_states"]) + "\n  }")
    with open(name, "w") as f:
        f.write("{\n  " + ",\n  ".join(parts) + "\n}\n")


zero, one = np.array([1, 0]), np.array([0, 1])
plus, minus = np.array([S, S]), np.array([S, -S])
bell = np.array([S, 0, 0, S])

write("bell.json", density([2, 2], np.outer(bell, bell)))
write("bell_pure.json", pure([2, 2], bell))
write("ghz.json", pure([2, 2, 2], np.array([S, 0, 0, 0, 0, 0, 0, S])))
write("bell_ab_zero_c.json", pure([2, 2, 2], np.kron(bell, zero)))
for p in ["0.3", "0.5", "0.8"]:
    rho = float(p) * np.outer(bell, bell) + (1 - float(p)) * np.eye(4) / 4
    write(f"werner_{p}.json", density([2, 2], rho))

write("sep_classical.json", separable([2, 2], [0.5, 0.5], [zero, one], [zero, one]))
write("sep_product.json", separable([2, 2], [1.0], [zero], [plus]))
write("sep_identity.json",
      separable([2, 2], [0.25] * 4, [zero, zero, one, one], [zero, one, zero, one]))
write("sep_bb84.json",
      separable([2, 2], [0.25] * 4, [zero, one, plus, minus], [zero, one, plus, minus]))
t = np.array([0.6, 0.8j])
q = np.array([1, 1j, -1]) / np.sqrt(3)
write("sep_qubit_qutrit.json",
      separable([2, 3], [0.5, 0.3, 0.2], [zero, t, plus], [np.array([1, 0, 0]), q, np.array([0, 0.6, 0.8])]))
