"""Independent training-step oracle.

Re-implements the networks, losses, pseudo-labels and Adamax in torch
(float64, autograd for every gradient) and replays a short training run for
each variant / schedule / loss family. Writes tests/fixtures/train_steps.json,
which the C++ tests replay through the library and compare value by value.

    python3 tests/oracles/train_step_oracle.py
"""
import json
import math
import pathlib

import torch

torch.set_default_dtype(torch.float64)

ARCH = dict(regions=3, evidence_dim=3, context_dim=4, hidden=5, classes=4)
TYPES = 2
LR, B1, B2, EPS = 0.01, 0.9, 0.999, 1e-8

SHAPES = {
    "base": [("q_proj", 3, 4), ("att_hidden", 5, 3), ("att_score", 1, 5), ("v_proj", 5, 3),
             ("q_fuse", 5, 4), ("cls_hidden", 5, 5), ("cls_out", 4, 5)],
    "evidence-only": [("hidden", 5, 3), ("out", 4, 5)],
    "context": [("hidden", 5, 4), ("out", 4, 5)],
    "self": [("out", 4, 5)],
    "rubi": [("hidden", 5, 4), ("mask", 4, 5), ("cls", 4, 4)],
}


def init(net, gen):
    return {name: {"weight": (torch.rand(o, i, generator=gen) - 0.5) * 1.6,
                   "bias": (torch.rand(o, generator=gen) - 0.5) * 0.4}
            for name, o, i in SHAPES[net]}


def lin(p, x):
    return p["weight"] @ x + p["bias"]


def relu(x):
    return torch.clamp(x, min=0.0)


def base_forward(p, inst):
    ev, c = inst["evidence"], inst["context"]
    q = relu(lin(p["q_proj"], c))
    scores = torch.stack([lin(p["att_score"], relu(lin(p["att_hidden"], ev[i] * q)))[0]
                          for i in range(ev.shape[0])])
    att = torch.softmax(scores, 0)
    pooled = att @ ev
    r = relu(lin(p["v_proj"], pooled)) * relu(lin(p["q_fuse"], c))
    return lin(p["cls_out"], relu(lin(p["cls_hidden"], r))), r


def evidence_forward(p, inst):
    h = relu(lin(p["hidden"], inst["evidence"].mean(0)))
    return lin(p["out"], h), h


def context_forward(p, inst):
    return lin(p["out"], relu(lin(p["hidden"], inst["context"])))


def out_fn(family, z):
    return torch.sigmoid(z) if family == "bce" else torch.softmax(z, 0)


def loss_fn(family, z, y):
    if family == "bce":
        return (torch.nn.functional.softplus(z) - y * z).sum()
    return (y * (torch.logsumexp(z, 0) - z)).sum()


def pseudo(family, y, h):
    if family == "bce":
        return torch.clamp(2 * y * torch.sigmoid(-2 * y * h), 0, 1)
    return torch.where(y > 0, torch.clamp(y - h, 0, 1), torch.zeros_like(y))


CHAINS = {"baseline": [], "vision-only": [], "gge-d": ["d"], "gge-q": ["q"], "gge-dq": ["d", "q"],
          "gge-sf": ["s"], "gge-d-sf": ["d", "s"]}


class Run:
    def __init__(self, variant, schedule, family, vision_only, seed):
        gen = torch.Generator().manual_seed(seed)
        self.variant, self.schedule, self.family = variant, schedule, family
        self.kind = "evidence-only" if vision_only or variant == "vision-only" else "base"
        self.params = {"base": init(self.kind, gen)}
        if variant in ("gge-q", "gge-dq", "sum-dq"):
            self.params["context"] = init("context", gen)
        if variant in ("gge-sf", "gge-d-sf"):
            self.params["self"] = init("self", gen)
        if variant == "rubi":
            self.params["rubi"] = init("rubi", gen)
        self.opt = {b: {"t": 0, "m": {k: {f: torch.zeros_like(v) for f, v in l.items()} for k, l in p.items()},
                        "u": {k: {f: torch.zeros_like(v) for f, v in l.items()} for k, l in p.items()}}
                    for b, p in self.params.items()}

    def forward_base(self, inst, params=None):
        p = params or self.params["base"]
        return (base_forward if self.kind == "base" else evidence_forward)(p, inst)

    def learned(self, comp, inst, params):
        if comp == "q":
            return context_forward(params["context"], inst)
        _, r = self.forward_base(inst, params["base"])
        return lin(params["self"]["out"], r.detach())

    def target(self, chain, n, inst, params):
        with torch.no_grad():
            prefix = chain[:n]
            if not prefix:
                return inst["label"].clone()
            h = None
            for comp in prefix:
                if comp in ("q", "s"):
                    h = out_fn(self.family, self.learned(comp, inst, params))
            if "d" in prefix:
                row = BIAS[inst["type_id"]]
                h = row.clone() if h is None else h + row
            return pseudo(self.family, inst["label"], h)

    def step(self, branch, grads):
        st = self.opt[branch]
        st["t"] += 1
        size = LR / (1 - B1 ** st["t"])
        with torch.no_grad():
            for k, layer in self.params[branch].items():
                for f in layer:
                    g = grads[k][f]
                    st["m"][k][f] = B1 * st["m"][k][f] + (1 - B1) * g
                    st["u"][k][f] = torch.maximum(B2 * st["u"][k][f], g.abs())
                    layer[f] -= size * st["m"][k][f] / (st["u"][k][f] + EPS)

    def grads_of(self, branch, loss):
        leaves = [(k, f, t) for k, l in self.params[branch].items() for f, t in l.items()]
        gs = torch.autograd.grad(loss, [t for _, _, t in leaves], allow_unused=True, retain_graph=True)
        out = {}
        for (k, f, t), g in zip(leaves, gs):
            out.setdefault(k, {})[f] = torch.zeros_like(t) if g is None else g
        return out

    def require_grad(self, on):
        for p in self.params.values():
            for l in p.values():
                for t in l.values():
                    t.requires_grad_(on)

    def mean_loss(self, batch, fn):
        return sum(fn(inst) for inst in batch) / len(batch)

    def train_step(self, batch):
        self.require_grad(True)
        try:
            if self.variant == "sum-dq":
                return self.step_sum_dq(batch)
            if self.variant == "rubi":
                return self.step_rubi(batch)
            if self.variant == "inverse-supervision":
                return self.step_inverse(batch)
            return self.step_gge(batch)
        finally:
            self.require_grad(False)

    def step_gge(self, batch):
        chain = CHAINS[self.variant]
        names = {"q": "context", "s": "self"}
        learned = [(m, c) for m, c in enumerate(chain) if c != "d"]
        out = {}
        if self.schedule == "tog" and learned:
            pending = []
            for m, c in learned:
                loss = self.mean_loss(batch, lambda i: loss_fn(
                    self.family, self.learned(c, i, self.params), self.target(chain, m, i, self.params)))
                pending.append((names[c], self.grads_of(names[c], loss)))
                out[names[c]] = loss.item()
            loss = self.mean_loss(batch, lambda i: loss_fn(
                self.family, self.forward_base(i)[0], self.target(chain, len(chain), i, self.params)))
            pending.append(("base", self.grads_of("base", loss)))
            out["base"] = loss.item()
            for b, g in pending:
                self.step(b, g)
            return out
        for m, c in learned:
            loss = self.mean_loss(batch, lambda i: loss_fn(
                self.family, self.learned(c, i, self.params), self.target(chain, m, i, self.params)))
            self.step(names[c], self.grads_of(names[c], loss))
            out[names[c]] = loss.item()
        loss = self.mean_loss(batch, lambda i: loss_fn(
            self.family, self.forward_base(i)[0], self.target(chain, len(chain), i, self.params)))
        self.step("base", self.grads_of("base", loss))
        out["base"] = loss.item()
        return out

    def step_sum_dq(self, batch):
        def joint(i):
            z = BIAS[i["type_id"]] + out_fn(self.family, context_forward(self.params["context"], i)) \
                + out_fn(self.family, self.forward_base(i)[0])
            return loss_fn(self.family, z, i["label"])
        loss = self.mean_loss(batch, joint)
        gc = self.grads_of("context", loss)
        gb = self.grads_of("base", loss)
        self.step("context", gc)
        self.step("base", gb)
        return {"joint": loss.item()}

    def step_rubi(self, batch):
        p = self.params["rubi"]

        def parts(i):
            g = lin(p["mask"], relu(lin(p["hidden"], i["context"])))
            masked = self.forward_base(i)[0] * torch.sigmoid(g)
            return loss_fn(self.family, masked, i["label"]), loss_fn(self.family, lin(p["cls"], g), i["label"])
        masked = self.mean_loss(batch, lambda i: parts(i)[0])
        question = self.mean_loss(batch, lambda i: parts(i)[1])
        gr = self.grads_of("rubi", masked + question)
        gb = self.grads_of("base", masked)
        self.step("rubi", gr)
        self.step("base", gb)
        return {"masked": masked.item(), "question": question.item()}

    def step_inverse(self, batch):
        loss = self.mean_loss(batch, lambda i: loss_fn(self.family, self.forward_base(i)[0], i["label"]))
        self.step("base", self.grads_of("base", loss))
        out = {"base": loss.item()}
        total, used = 0.0, False
        for i in batch:
            z = self.forward_base(i)[0]
            probs = out_fn(self.family, z).detach().tolist()
            order = sorted(range(len(probs)), key=lambda a: (-probs[a], a))
            reduced = i["label"].clone()
            for a in order[:INVERSE_N]:
                reduced[a] = 0.0
            if not bool((reduced > 0).any()):
                continue
            used = True
            total = total + loss_fn(self.family, z, reduced)
        total = total / len(batch)
        if used:
            self.step("base", self.grads_of("base", total))
        out["round2"] = total.item() if torch.is_tensor(total) else float(total)
        return out


INVERSE_N = 1


def make_data():
    gen = torch.Generator().manual_seed(7)
    labels = [[0.9, 0.3, 0, 0], [0, 1, 0, 0], [0, 0, 0.6, 0.9], [0, 0, 1, 0.3]]
    data = []
    for k, lab in enumerate(labels):
        mask = [0.0] * ARCH["regions"]
        mask[k % ARCH["regions"]] = 1.0
        data.append({"evidence": torch.randn(ARCH["regions"], ARCH["evidence_dim"], generator=gen),
                     "context": torch.randn(ARCH["context_dim"], generator=gen),
                     "type_id": 0 if k < 2 else 1,
                     "label": torch.tensor(lab, dtype=torch.float64),
                     "mask": mask})
    return data


def fit_bias(data):
    rows = [[0.0] * ARCH["classes"] for _ in range(TYPES)]
    for i in data:
        for a, y in enumerate(i["label"].tolist()):
            rows[i["type_id"]][a] += y
    return [torch.tensor([v / sum(r) for v in r]) for r in rows]


DATA = make_data()
BIAS = fit_bias(DATA)
BATCHES = [[0, 2], [1, 3], [3, 0]]


def dump_params(params):
    return {b: {k: {"weight": l["weight"].tolist(), "bias": l["bias"].tolist()} for k, l in p.items()}
            for b, p in params.items()}


CASES = [
    ("baseline", "iter", False), ("gge-d", "iter", False), ("gge-q", "iter", False),
    ("gge-q", "tog", False), ("gge-dq", "iter", False), ("gge-dq", "tog", False),
    ("gge-sf", "iter", False), ("gge-sf", "tog", False), ("gge-d-sf", "iter", False),
    ("gge-d-sf", "tog", False), ("sum-dq", "iter", False), ("rubi", "iter", False),
    ("inverse-supervision", "iter", False), ("vision-only", "iter", False), ("gge-d", "iter", True),
]


def main():
    cases = []
    for family in ("bce", "sxce"):
        for n, (variant, schedule, vo) in enumerate(CASES):
            run = Run(variant, schedule, family, vo, seed=100 + n)
            initial = dump_params(run.params)
            losses = [run.train_step([DATA[k] for k in b]) for b in BATCHES]
            cases.append({"variant": variant, "schedule": schedule, "family": family,
                          "vision_only": vo, "initial": initial, "final": dump_params(run.params),
                          "losses": losses})
    out = {
        "arch": ARCH, "types": TYPES, "lr": LR, "beta1": B1, "beta2": B2, "inverse_n": INVERSE_N,
        "instances": [{"evidence": i["evidence"].tolist(), "context": i["context"].tolist(),
                       "type_id": i["type_id"], "label": i["label"].tolist(), "mask": i["mask"]}
                      for i in DATA],
        "bias": [r.tolist() for r in BIAS],
        "batches": BATCHES,
        "cases": cases,
    }
    path = pathlib.Path(__file__).resolve().parents[1] / "fixtures" / "train_steps.json"
    path.write_text(json.dumps(out, indent=1))
    print(f"wrote {len(cases)} cases to {path}")


if __name__ == "__main__":
    main()
