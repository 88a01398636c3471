#!/usr/bin/env python3
"""Writes the shipped workload fixtures into data/workloads.

Shapes follow the public architecture descriptions of each network. Repeated
layers are folded into one node with repeat=<n>; large models are split into
a few copies of the folded block so no single node outgrows a memory module.
"""

import argparse
from pathlib import Path


class Net:
    def __init__(self, name, bpe):
        self.name = name
        self.bpe = bpe
        self.lines = [f"network {name}"]
        self.out = {}  # node id -> output bytes per sample

    def node(self, nid, kind, out_elems, repeat=1, **dims):
        fields = " ".join(f"{k}={v}" for k, v in dims.items())
        extra = f" repeat={repeat}" if repeat != 1 else ""
        self.lines.append(f"node {nid} {kind} {fields} bpe={self.bpe}{extra}")
        self.out[nid] = out_elems * self.bpe
        return nid

    def edge(self, src, dst, nbytes=None):
        self.lines.append(f"edge {src} {dst} bytes={nbytes if nbytes else self.out[src]}")

    def chain(self, *ids):
        for a, b in zip(ids, ids[1:]):
            self.edge(a, b)

    def text(self):
        return "\n".join(self.lines) + "\n"


def conv(net, nid, c, k, r, p, stride=1, repeat=1):
    return net.node(nid, "conv", p * p * k, repeat, n=1, k=k, c=c, r=r, s=r, p=p, q=p, stride=stride)


def dwconv(net, nid, c, r, p, stride=1, repeat=1):
    return net.node(nid, "depthwise-conv", p * p * c, repeat, n=1, c=c, r=r, s=r, p=p, q=p, stride=stride)


def eltwise(net, nid, e, arity=1, ops=1, repeat=1):
    dims = {"e": e}
    if arity != 1:
        dims["arity"] = arity
    if ops != 1:
        dims["ops"] = ops
    return net.node(nid, "elementwise", e, repeat, **dims)


def matmul(net, nid, m, k, n, repeat=1):
    return net.node(nid, "matmul", m * n, repeat, m=m, k=k, n=n)


def norm(net, nid, e, c, repeat=1):
    return net.node(nid, "normalization", e, repeat, e=e, c=c)


def attention(net, prefix, h, l, s, d, repeat=1):
    score = net.node(f"{prefix}score", "attention-score", h * l * s, repeat, h=h, l=l, s=s, d=d)
    soft = eltwise(net, f"{prefix}softmax", h * l * s, ops=5, repeat=repeat)
    ctx = net.node(f"{prefix}ctx", "attention-context", h * l * d, repeat, h=h, l=l, s=s, d=d)
    net.chain(score, soft, ctx)
    return score, ctx


def resnet50():
    net = Net("resnet50", 1)
    prev = conv(net, "stem", 3, 64, 7, 112, stride=2)
    pool = eltwise(net, "maxpool", 56 * 56 * 64, ops=9)
    net.chain(prev, pool)
    prev, cin = pool, 64
    stages = [(3, 64, 256, 56), (4, 128, 512, 28), (6, 256, 1024, 14), (3, 512, 2048, 7)]
    for si, (blocks, mid, out, sp) in enumerate(stages, start=1):
        stride = 1 if si == 1 else 2
        tag = f"s{si}b1"
        a = conv(net, f"{tag}a", cin, mid, 1, sp * stride)
        b = conv(net, f"{tag}b", mid, mid, 3, sp, stride=stride)
        c = conv(net, f"{tag}c", mid, out, 1, sp)
        sc = conv(net, f"{tag}sc", cin, out, 1, sp, stride=stride)
        add = eltwise(net, f"{tag}add", sp * sp * out, arity=2)
        net.chain(prev, a, b, c, add)
        net.chain(prev, sc, add)
        prev = add
        if blocks > 1:
            r = blocks - 1
            tag = f"s{si}rest"
            a = conv(net, f"{tag}a", out, mid, 1, sp, repeat=r)
            b = conv(net, f"{tag}b", mid, mid, 3, sp, repeat=r)
            c = conv(net, f"{tag}c", mid, out, 1, sp, repeat=r)
            add = eltwise(net, f"{tag}add", sp * sp * out, arity=2, repeat=r)
            net.chain(prev, a, b, c, add)
            net.edge(prev, add)
            prev = add
        cin = out
    gap = eltwise(net, "avgpool", 2048, ops=49)
    fc = matmul(net, "fc", 1, 2048, 1000)
    net.chain(prev, gap, fc)
    return net


def mobilenetv3():
    net = Net("mobilenetv3", 1)
    prev = conv(net, "stem", 3, 16, 3, 112, stride=2)
    cin, sp_in = 16, 112
    # kernel, expansion, out, stride, count
    bnecks = [
        (3, 16, 16, 1, 1), (3, 64, 24, 2, 1), (3, 72, 24, 1, 1), (5, 72, 40, 2, 1),
        (5, 120, 40, 1, 2), (3, 240, 80, 2, 1), (3, 200, 80, 1, 1), (3, 184, 80, 1, 2),
        (3, 480, 112, 1, 1), (3, 672, 112, 1, 1), (5, 672, 160, 2, 1), (5, 960, 160, 1, 2),
    ]
    for i, (k, exp, out, stride, count) in enumerate(bnecks, start=1):
        sp = sp_in // stride
        tag = f"bn{i}"
        block_in, x = prev, prev
        if exp != cin:
            x = conv(net, f"{tag}exp", cin, exp, 1, sp_in, repeat=count)
            net.edge(prev, x)
        dw = dwconv(net, f"{tag}dw", exp, k, sp, stride=stride, repeat=count)
        proj = conv(net, f"{tag}proj", exp, out, 1, sp, repeat=count)
        net.chain(x, dw, proj)
        prev = proj
        if stride == 1 and cin == out:
            add = eltwise(net, f"{tag}add", sp * sp * out, arity=2, repeat=count)
            net.chain(proj, add)
            net.edge(block_in, add)
            prev = add
        cin, sp_in = out, sp
    last = conv(net, "last", 160, 960, 1, 7)
    gap = eltwise(net, "avgpool", 960, ops=49)
    fc1 = matmul(net, "fc1", 1, 960, 1280)
    fc2 = matmul(net, "fc2", 1, 1280, 1000)
    net.chain(prev, last, gap, fc1, fc2)
    return net


def vit_b16():
    net = Net("vit_b16", 1)
    t, dm, h, hd, ff, layers = 197, 768, 12, 64, 3072, 12
    prev = conv(net, "patch", 3, dm, 16, 14, stride=16)
    r = layers
    ln1 = norm(net, "ln1", t * dm, dm, repeat=r)
    qkv = matmul(net, "qkv", t, dm, 3 * dm, repeat=r)
    score, ctx = attention(net, "", h, t, t, hd, repeat=r)
    proj = matmul(net, "proj", t, dm, dm, repeat=r)
    add1 = eltwise(net, "add1", t * dm, arity=2, repeat=r)
    ln2 = norm(net, "ln2", t * dm, dm, repeat=r)
    fc1 = matmul(net, "fc1", t, dm, ff, repeat=r)
    gelu = eltwise(net, "gelu", t * ff, ops=8, repeat=r)
    fc2 = matmul(net, "fc2", t, ff, dm, repeat=r)
    add2 = eltwise(net, "add2", t * dm, arity=2, repeat=r)
    net.chain(prev, ln1, qkv, score)
    net.edge(qkv, ctx, t * dm)
    net.chain(ctx, proj, add1, ln2, fc1, gelu, fc2, add2)
    net.edge(prev, add1)
    net.edge(add1, add2)
    head_ln = norm(net, "head_ln", dm, dm)
    head = matmul(net, "head", 1, dm, 1000)
    net.chain(add2, head_ln, head)
    return net


def replknet31():
    net = Net("replknet31", 1)
    prev = conv(net, "stem1", 3, 128, 3, 112, stride=2)
    s2 = dwconv(net, "stem2", 128, 3, 56, stride=2)
    net.chain(prev, s2)
    prev = s2
    chans, spatial, depth, kernels = (128, 256, 512, 1024), (56, 28, 14, 7), (2, 2, 18, 2), (31, 29, 27, 13)
    for i, (c, sp, r, k) in enumerate(zip(chans, spatial, depth, kernels), start=1):
        if i > 1:
            t1 = conv(net, f"t{i}pw", c // 2, c, 1, sp * 2)
            t2 = dwconv(net, f"t{i}dw", c, 3, sp, stride=2)
            net.chain(prev, t1, t2)
            prev = t2
        tag = f"st{i}"
        pw1 = conv(net, f"{tag}pw1", c, c, 1, sp, repeat=r)
        lk = dwconv(net, f"{tag}lk", c, k, sp, repeat=r)
        pw2 = conv(net, f"{tag}pw2", c, c, 1, sp, repeat=r)
        add1 = eltwise(net, f"{tag}add1", sp * sp * c, arity=2, repeat=r)
        f1 = conv(net, f"{tag}ffn1", c, 4 * c, 1, sp, repeat=r)
        act = eltwise(net, f"{tag}gelu", sp * sp * 4 * c, ops=8, repeat=r)
        f2 = conv(net, f"{tag}ffn2", 4 * c, c, 1, sp, repeat=r)
        add2 = eltwise(net, f"{tag}add2", sp * sp * c, arity=2, repeat=r)
        net.chain(prev, pw1, lk, pw2, add1, f1, act, f2, add2)
        net.edge(prev, add1)
        net.edge(add1, add2)
        prev = add2
    gap = eltwise(net, "avgpool", 1024, ops=49)
    fc = matmul(net, "fc", 1, 1024, 1000)
    net.chain(prev, gap, fc)
    return net


def opt_block(net, prefix, tokens, context, dm, h, hd, ff, repeat, prev):
    ln1 = norm(net, f"{prefix}ln1", tokens * dm, dm, repeat=repeat)
    qkv = matmul(net, f"{prefix}qkv", tokens, dm, 3 * dm, repeat=repeat)
    score, ctx = attention(net, prefix, h, tokens, context, hd, repeat=repeat)
    proj = matmul(net, f"{prefix}proj", tokens, dm, dm, repeat=repeat)
    add1 = eltwise(net, f"{prefix}add1", tokens * dm, arity=2, repeat=repeat)
    ln2 = norm(net, f"{prefix}ln2", tokens * dm, dm, repeat=repeat)
    fc1 = matmul(net, f"{prefix}fc1", tokens, dm, ff, repeat=repeat)
    relu = eltwise(net, f"{prefix}relu", tokens * ff, repeat=repeat)
    fc2 = matmul(net, f"{prefix}fc2", tokens, ff, dm, repeat=repeat)
    add2 = eltwise(net, f"{prefix}add2", tokens * dm, arity=2, repeat=repeat)
    if prev:
        net.edge(prev, ln1)
        net.edge(prev, add1)
    net.chain(ln1, qkv, score)
    net.edge(qkv, ctx, tokens * dm * net.bpe)
    net.chain(ctx, proj, add1, ln2, fc1, relu, fc2, add2)
    net.edge(add1, add2)
    return add2


def opt(name, tokens, context, dm, h, ff, layers, copies):
    net = Net(name, 2)
    prev = None
    for c in range(copies):
        prev = opt_block(net, f"c{c}_", tokens, context, dm, h, dm // h, ff, layers // copies, prev)
    return net


def compute_heavy():
    # Large square matmuls stay compute-bound even on DDR5-class bandwidth;
    # the normalization layers between them are memory-bound.
    net = Net("compute_heavy", 1)
    d = 4096
    ids = []
    for i in range(6):
        ids.append(matmul(net, f"mm{i}", d, d, d))
        if i in (1, 3):
            ids.append(norm(net, f"ln{i}", d * d, d))
    net.chain(*ids)
    return net


def toy_cnn():
    net = Net("toy_cnn", 1)
    a = conv(net, "c1", 3, 16, 3, 32, stride=2)
    b = dwconv(net, "dw", 16, 3, 32)
    c = conv(net, "c2", 16, 32, 1, 32)
    d = eltwise(net, "pool", 32, ops=1024)
    e = matmul(net, "fc", 1, 32, 10)
    net.chain(a, b, c, d, e)
    return net


def toy_attn():
    net = Net("toy_attn", 2)
    t, dm, h = 64, 128, 4
    q = matmul(net, "qkv", t, dm, 3 * dm)
    score, ctx = attention(net, "", h, t, t, dm // h)
    o = matmul(net, "proj", t, dm, dm)
    f = matmul(net, "ffn", t, dm, 4 * dm)
    net.chain(q, score)
    net.edge(q, ctx, t * dm * 2)
    net.chain(ctx, o, f)
    return net


FIXTURES = {
    "resnet50": resnet50,
    "mobilenetv3": mobilenetv3,
    "vit_b16": vit_b16,
    "replknet31": replknet31,
    # 66B: 64 layers folded into two copies of 32.
    "opt66b_prefill": lambda: opt("opt66b_prefill", 512, 512, 9216, 64, 36864, 64, 2),
    "opt66b_decode": lambda: opt("opt66b_decode", 1, 2048, 9216, 64, 36864, 64, 2),
    "opt1p3b_decode": lambda: opt("opt1p3b_decode", 1, 2048, 2048, 32, 8192, 24, 1),
    "compute_heavy": compute_heavy,
    "toy_cnn": toy_cnn,
    "toy_attn": toy_attn,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "workloads"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, build in FIXTURES.items():
        (out / f"{name}.net").write_text(build().text())


if __name__ == "__main__":
    main()
