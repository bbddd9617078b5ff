#!/usr/bin/env python3
# Copyright 2026 The splitplan Authors.
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
"""Writes configs/enet_reference.json: a 30-module ENet-style network."""

import json
import pathlib
import sys


def conv(c_in, c_out, k=(1, 1), s=1, p=(0, 0), d=1, kind="Conv", po=0):
    layer = {"kind": kind, "c_in": c_in, "c_out": c_out, "kw": k[0],
             "kh": k[1], "sw": s, "sh": s}
    if p != (0, 0):
        layer["pw"], layer["ph"] = p
    if d != 1:
        layer["dw"] = layer["dh"] = d
    if po:
        layer["pwo"] = layer["pho"] = po
    return layer


def pool(c, kind="MaxPool"):
    return {"kind": kind, "c_in": c, "c_out": c, "kw": 2, "kh": 2,
            "sw": 2, "sh": 2}


def regular(c, variant=("plain",)):
    inner = c // 4
    if variant[0] == "dilated":
        d = variant[1]
        mid = [conv(inner, inner, (3, 3), p=(d, d), d=d)]
    elif variant[0] == "asym":
        mid = [conv(inner, inner, (5, 1), p=(2, 0)),
               conv(inner, inner, (1, 5), p=(0, 2))]
    else:
        mid = [conv(inner, inner, (3, 3), p=(1, 1))]
    return {"sampling": "none",
            "main_branch": [conv(c, inner)] + mid + [conv(inner, c)],
            "skip_branch": []}


def down(c_in, c_out):
    inner = c_in // 4
    return {"sampling": "down", "pool_bits_per_element": 2,
            "main_branch": [conv(c_in, inner, (2, 2), s=2),
                            conv(inner, inner, (3, 3), p=(1, 1)),
                            conv(inner, c_out)],
            "skip_branch": [pool(c_in), conv(c_in, c_out)]}


def up(c_in, c_out):
    inner = c_out // 4
    return {"sampling": "up",
            "main_branch": [conv(c_in, inner),
                            conv(inner, inner, (3, 3), s=2, p=(1, 1),
                                 kind="TransposeConv", po=1),
                            conv(inner, c_out)],
            "skip_branch": [conv(c_in, c_out), pool(c_out, "MaxUnpool")]}


STAGE = [("plain",), ("dilated", 2), ("asym",), ("dilated", 4),
         ("plain",), ("dilated", 8), ("asym",), ("dilated", 16)]


def build():
    modules = [{"sampling": "down",
                "main_branch": [conv(3, 16, (3, 3), s=2, p=(1, 1))],
                "skip_branch": [conv(3, 16, s=2)]}]
    modules.append(down(16, 64))
    modules += [regular(64) for _ in range(4)]
    modules.append(down(64, 128))
    modules += [regular(128, v) for v in STAGE]
    modules.append(regular(128))
    modules += [regular(128, v) for v in STAGE]
    modules.append(up(128, 64))
    modules += [regular(64) for _ in range(2)]
    modules.append(up(64, 16))
    modules.append(regular(16))
    modules.append({"sampling": "up",
                    "main_branch": [conv(16, 20, (2, 2), s=2,
                                         kind="TransposeConv")],
                    "skip_branch": [conv(16, 20, s=2, kind="TransposeConv",
                                         po=1)]})
    for i, m in enumerate(modules, start=1):
        m["id"] = i
        m.setdefault("pool_bits_per_element", 0)
    ordered = [{k: m[k] for k in ("id", "sampling", "pool_bits_per_element",
                                  "main_branch", "skip_branch")}
               for m in modules]
    return {"bits_per_element": 32,
            "input": {"channels": 3, "height": 1024, "width": 2048},
            "modules": ordered}


def main():
    out = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else (
        pathlib.Path(__file__).resolve().parent.parent / "configs" /
        "enet_reference.json")
    arch = build()
    assert len(arch["modules"]) == 30
    out.write_text(json.dumps(arch, indent=1) + "\n")


if __name__ == "__main__":
    main()
