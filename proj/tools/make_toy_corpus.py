#!/usr/bin/env python3
# Copyright 2026 The CCGVAE Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Generates the bundled QM9-like toy corpus (C/N/O/F, <= 9 heavy atoms).

Molecules are grown from small ring scaffolds or a single atom by attaching
substituents under simple stability rules (no heteroatom-heteroatom bonds,
no cumulated double bonds, multiple bonds only C=C, C=O, C=N, C#C, C#N).
Aromatic scaffolds are emitted in lowercase SMILES so the parser's
kekulization path is exercised.

Usage: make_toy_corpus.py [--count 500] [--seed 7] > data/toy_qm9.smi
"""

import argparse
import hashlib
import random

VALENCE = {"C": 4, "N": 3, "O": 2, "F": 1}

# (atoms, ring bonds, aromatic, index of pyrrole-type N or -1)
SCAFFOLDS = [
    (["C"] * 6, [(i, (i + 1) % 6, 1 + (i % 2 == 0)) for i in range(6)], True, -1),
    (["C"] * 5 + ["N"], [(i, (i + 1) % 6, 1 + (i % 2 == 0)) for i in range(6)], True, -1),
    (["C", "N", "C", "N", "C", "C"], [(i, (i + 1) % 6, 1 + (i % 2 == 0)) for i in range(6)], True, -1),
    (["O", "C", "C", "C", "C"], [(0, 1, 1), (1, 2, 2), (2, 3, 1), (3, 4, 2), (4, 0, 1)], True, -1),
    (["N", "C", "C", "C", "C"], [(0, 1, 1), (1, 2, 2), (2, 3, 1), (3, 4, 2), (4, 0, 1)], True, 0),
    (["N", "C", "N", "C", "C"], [(0, 1, 1), (1, 2, 2), (2, 3, 1), (3, 4, 2), (4, 0, 1)], True, 0),
    (["O", "C", "N", "C", "C"], [(0, 1, 1), (1, 2, 2), (2, 3, 1), (3, 4, 2), (4, 0, 1)], True, -1),
    (["C"] * 3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)], False, -1),
    (["C"] * 4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)], False, -1),
    (["C"] * 5, [(i, (i + 1) % 5, 1) for i in range(5)], False, -1),
    (["C"] * 6, [(i, (i + 1) % 6, 1) for i in range(6)], False, -1),
    (["O", "C", "C"], [(0, 1, 1), (1, 2, 1), (2, 0, 1)], False, -1),
    (["N", "C", "C"], [(0, 1, 1), (1, 2, 1), (2, 0, 1)], False, -1),
    (["O", "C", "C", "C"], [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)], False, -1),
    (["O", "C", "C", "C", "C"], [(i, (i + 1) % 5, 1) for i in range(5)], False, -1),
    (["N", "C", "C", "C", "C"], [(i, (i + 1) % 5, 1) for i in range(5)], False, -1),
    (["N", "C", "C", "C", "C", "C"], [(i, (i + 1) % 6, 1) for i in range(6)], False, -1),
    (["C"] * 5, [(0, 1, 2), (1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 0, 1)], False, -1),
    (["C"] * 6, [(0, 1, 2), (1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1), (5, 0, 1)], False, -1),
    (["O", "C", "C", "O", "C"], [(i, (i + 1) % 5, 1) for i in range(5)], False, -1),
]

SUBSTITUENT_WEIGHTS = {"C": 0.62, "N": 0.14, "O": 0.19, "F": 0.05}
MULTIPLE_OK = {("C", "C"), ("C", "O"), ("O", "C"), ("C", "N"), ("N", "C")}
TRIPLE_OK = {("C", "C"), ("C", "N"), ("N", "C")}


class Mol:
    def __init__(self):
        self.elem = []
        self.aromatic = []
        self.pyrrole_n = []
        self.bonds = {}  # frozenset -> order

    def add_atom(self, elem, aromatic=False, pyrrole=False):
        self.elem.append(elem)
        self.aromatic.append(aromatic)
        self.pyrrole_n.append(pyrrole)
        return len(self.elem) - 1

    def nbrs(self, a):
        out = []
        for key, order in self.bonds.items():
            if a in key:
                (b,) = key - {a}
                out.append((b, order))
        return out

    def used(self, a):
        return sum(o for _, o in self.nbrs(a))

    def free(self, a):
        return VALENCE[self.elem[a]] - self.used(a)

    def doubles(self, a):
        return sum(1 for _, o in self.nbrs(a) if o >= 2)


def hetero(e):
    return e != "C"


def try_attach(mol, rng):
    anchors = [a for a in range(len(mol.elem)) if mol.free(a) > 0]
    if not anchors:
        return False
    a = rng.choice(anchors)
    elems = list(SUBSTITUENT_WEIGHTS)
    e = rng.choices(elems, weights=[SUBSTITUENT_WEIGHTS[x] for x in elems])[0]
    ea = mol.elem[a]
    if hetero(ea) and hetero(e):
        return False
    if mol.pyrrole_n[a]:
        return False
    order = 1
    if not mol.aromatic[a] and mol.doubles(a) == 0 and rng.random() < 0.3:
        pair = (ea, e)
        cap = min(mol.free(a), VALENCE[e])
        if pair in TRIPLE_OK and cap >= 3 and rng.random() < 0.3 and mol.used(a) <= 1:
            order = 3
        elif pair in MULTIPLE_OK and cap >= 2:
            order = 2
    if order > mol.free(a):
        return False
    b = mol.add_atom(e)
    mol.bonds[frozenset((a, b))] = order
    return True


def bfs_dist(mol, src):
    dist = {src: 0}
    frontier = [src]
    while frontier:
        nxt = []
        for a in frontier:
            for b, _ in mol.nbrs(a):
                if b not in dist:
                    dist[b] = dist[a] + 1
                    nxt.append(b)
        frontier = nxt
    return dist


def try_ring_closure(mol, rng):
    cands = [a for a in range(len(mol.elem))
             if mol.free(a) > 0 and not mol.aromatic[a] and mol.doubles(a) == 0
             and all(o < 3 for _, o in mol.nbrs(a))]
    if len(cands) < 2:
        return False
    a, b = rng.sample(cands, 2)
    if hetero(mol.elem[a]) and hetero(mol.elem[b]):
        return False
    d = bfs_dist(mol, a).get(b)
    if d is None or d < 2 or d > 5:
        return False
    mol.bonds[frozenset((a, b))] = 1
    return True


def grow(rng):
    mol = Mol()
    target = rng.randint(3, 9)
    if rng.random() < 0.45:
        atoms, bonds, aromatic, pyrrole = rng.choice(SCAFFOLDS)
        if len(atoms) > target:
            target = len(atoms)
        for i, e in enumerate(atoms):
            mol.add_atom(e, aromatic, i == pyrrole)
        for u, v, o in bonds:
            mol.bonds[frozenset((u, v))] = o
    else:
        mol.add_atom(rng.choices(["C", "N", "O"], weights=[0.8, 0.1, 0.1])[0])
    attempts = 0
    while len(mol.elem) < target and attempts < 200:
        attempts += 1
        if len(mol.elem) >= 4 and rng.random() < 0.08:
            try_ring_closure(mol, rng)
        else:
            try_attach(mol, rng)
    if len(mol.elem) < 2:
        return None
    return mol


def atom_text(mol, a):
    e = mol.elem[a]
    if not mol.aromatic[a]:
        return e
    if mol.pyrrole_n[a] and len(mol.nbrs(a)) == 2:
        return "[nH]"
    return e.lower()


def bond_text(mol, a, b):
    order = mol.bonds[frozenset((a, b))]
    if mol.aromatic[a] and mol.aromatic[b]:
        return ""
    return {1: "", 2: "=", 3: "#"}[order]


def to_smiles(mol, rng):
    n = len(mol.elem)
    start = rng.randrange(n)
    visited = [False] * n
    order = []
    parent = {start: None}
    children = {a: [] for a in range(n)}
    ring_pairs = []

    def dfs(a):
        visited[a] = True
        order.append(a)
        nb = [b for b, _ in mol.nbrs(a)]
        rng.shuffle(nb)
        for b in nb:
            if b == parent[a]:
                continue
            if not visited[b]:
                parent[b] = a
                children[a].append(b)
                dfs(b)
            elif order.index(b) < order.index(a):
                ring_pairs.append((b, a))

    dfs(start)
    opens = {a: [] for a in range(n)}
    closes = {a: [] for a in range(n)}
    for x, y in ring_pairs:
        opens[x].append(y)
        closes[y].append(x)
    labels = {}
    free = []
    counter = [0]

    def emit(a):
        s = atom_text(mol, a)
        for x in closes[a]:
            lab = labels[(x, a)]
            s += str(lab)
            free.append(lab)
        for y in opens[a]:
            if free:
                free.sort()
                lab = free.pop(0)
            else:
                counter[0] += 1
                lab = counter[0]
            labels[(a, y)] = lab
            s += bond_text(mol, a, y) + str(lab)
        kids = children[a]
        for i, c in enumerate(kids):
            part = bond_text(mol, a, c) + emit(c)
            s += part if i == len(kids) - 1 else "(" + part + ")"
        return s

    return emit(start)


def wl_key(mol):
    labels = [(mol.elem[a], mol.aromatic[a]) for a in range(len(mol.elem))]
    labels = [str(x) for x in labels]
    for _ in range(4):
        labels = [
            labels[a] + "|" + ",".join(sorted(labels[b] + str(o) for b, o in mol.nbrs(a)))
            for a in range(len(mol.elem))
        ]
        labels = [hashlib.md5(x.encode()).hexdigest() for x in labels]
    return tuple(sorted(labels))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=500)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    seen = set()
    out = []
    while len(out) < args.count:
        mol = grow(rng)
        if mol is None:
            continue
        key = wl_key(mol)
        if key in seen:
            continue
        seen.add(key)
        out.append(to_smiles(mol, rng))
    print("# QM9-like toy corpus: C/N/O/F, <= 9 heavy atoms, generated by")
    print("# tools/make_toy_corpus.py --count %d --seed %d" % (args.count, args.seed))
    for s in out:
        print(s)


if __name__ == "__main__":
    main()
