"""Closed-form values for losses, pseudo-labels and a hand-traced forward pass.

Uses mpmath at 50 digits so the frozen doubles are correctly rounded.
Writes tests/fixtures/scalars.json.

    python3 tests/oracles/scalar_oracle.py
"""
import json
import pathlib
import random

import mpmath as mp

mp.mp.dps = 50


def sig(x):
    return 1 / (1 + mp.exp(-x))


def clamp01(x):
    return min(max(x, mp.mpf(0)), mp.mpf(1))


def bce_grid():
    rows = []
    for y in ("0", "0.3", "0.6", "0.9", "1"):
        for k in range(-50, 51):
            h = mp.mpf(k) / 10
            yy = mp.mpf(y)
            rows.append({"y": float(yy), "h": float(h), "pl": float(clamp01(2 * yy * sig(-2 * yy * h)))})
    return rows


def ce_cases():
    rng = random.Random(11)
    cases = []
    for _ in range(200):
        c = rng.randint(2, 8)
        raw = [rng.random() for _ in range(c)]
        probs = [float(mp.mpf(v) / mp.fsum(raw)) for v in raw]
        label = [rng.choice([0.0, 0.0, 0.3, 0.6, 0.9, 1.0]) for _ in range(c)]
        pl = [float(clamp01(mp.mpf(y) - mp.mpf(p))) if y > 0 else 0.0 for y, p in zip(label, probs)]
        cases.append({"label": label, "probs": probs, "pl": pl})
    return cases


def loss_cases():
    rng = random.Random(12)
    out = []
    for _ in range(100):
        c = rng.randint(1, 6)
        z = [rng.uniform(-30, 30) if rng.random() < 0.2 else rng.uniform(-4, 4) for _ in range(c)]
        y = [rng.choice([0.0, 0.3, 0.6, 0.9, 1.0]) for _ in range(c)]
        zz = [mp.mpf(v) for v in z]
        bce = mp.fsum(mp.log(1 + mp.exp(v)) - mp.mpf(t) * v for v, t in zip(zz, y))
        lse = mp.log(mp.fsum(mp.exp(v) for v in zz))
        ce = mp.fsum(mp.mpf(t) * (lse - v) for v, t in zip(zz, y))
        soft = [mp.exp(v - lse) for v in zz]
        mass = mp.fsum(mp.mpf(t) for t in y)
        out.append({"logits": z, "label": y, "bce": float(bce), "ce": float(ce),
                    "bce_grad": [float(sig(v) - mp.mpf(t)) for v, t in zip(zz, y)],
                    "ce_grad": [float(mass * s - mp.mpf(t)) for s, t in zip(soft, y)]})
    return out


def hand_trace():
    # n_v = 2, d_v = d_q = 2, hidden = 2, C = 2, every weight and bias 0.1.
    ev = [[1.0, 2.0], [0.5, -1.0]]
    c = [1.0, -0.5]
    w = mp.mpf("0.1")
    relu = lambda v: max(v, mp.mpf(0))
    lin = lambda x, out: [w * mp.fsum(x) + w for _ in range(out)]
    q = [relu(v) for v in lin([mp.mpf(v) for v in c], 2)]
    scores = []
    for v in ev:
        gated = [mp.mpf(a) * b for a, b in zip(v, q)]
        h = [relu(x) for x in lin(gated, 2)]
        scores.append(lin(h, 1)[0])
    m = max(scores)
    e = [mp.exp(s - m) for s in scores]
    att = [x / mp.fsum(e) for x in e]
    pooled = [mp.fsum(att[i] * ev[i][d] for i in range(2)) for d in range(2)]
    r = [a * b for a, b in zip([relu(x) for x in lin(pooled, 2)],
                               [relu(x) for x in lin([mp.mpf(v) for v in c], 2)])]
    h = [relu(x) for x in lin(r, 2)]
    logits = lin(h, 2)
    # Evidence-only on the same input: mean-pool, hidden, out.
    mean = [(mp.mpf(ev[0][d]) + ev[1][d]) / 2 for d in range(2)]
    eo = lin([relu(x) for x in lin(mean, 2)], 2)
    # Context branch.
    cb = lin([relu(x) for x in lin([mp.mpf(v) for v in c], 2)], 2)
    return {"evidence": ev, "context": c, "attention": [float(a) for a in att],
            "logits": [float(v) for v in logits], "evidence_only_logits": [float(v) for v in eo],
            "context_logits": [float(v) for v in cb]}


def main():
    out = {"bce_grid": bce_grid(), "ce_cases": ce_cases(), "loss_cases": loss_cases(),
           "hand_trace": hand_trace()}
    path = pathlib.Path(__file__).resolve().parents[1] / "fixtures" / "scalars.json"
    path.write_text(json.dumps(out, indent=1))
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
