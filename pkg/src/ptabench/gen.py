"""Random well-typed programs in the ``.mc`` subset.

Used by the property tests and by the timing harness. Every generated
program lowers without error. With ``acyclic=True`` a function only calls
functions defined after it, so the call graph has no cycles.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

HEADER = """struct S { int v; int *f; };
"""

# signature kinds: name -> (declaration template, pointer-typed return)
SIGS = {
    "v1": ("void {name}(int *x)", False),
    "p2": ("int *{name}(int *x, int *y)", True),
    "v2": ("void {name}(int **x)", False),
}
FP_DECLS = {
    "v1": "void (*{fp})(int *);",
    "p2": "int *(*{fp})(int *, int *);",
}


@dataclass
class GenConfig:
    max_functions: int = 6
    max_statements: int = 40
    acyclic: bool = False
    loops: bool = True
    heap: bool = True
    structs: bool = True
    function_pointers: bool = True
    max_depth: int = 2
    call_rate: float = 0.17  # chance that a simple statement is a call
    module_size: int = 0  # >0: functions other than main call only within their module


class _Func:
    def __init__(self, name, sig, index):
        self.name = name
        self.sig = sig
        self.index = index
        self.lines: list = []
        self.scope = None  # (ints, ptrs, pptrs, structs) visible globals; None: all
        self.must_call: list = []  # callees invoked once at the end of the body


def _module(f, cfg) -> int:
    return (f.index - 1) // cfg.module_size


class ProgramGenerator:
    def __init__(self, seed: int, config: GenConfig | None = None):
        self.rng = random.Random(seed)
        self.cfg = config or GenConfig()
        self.budget = 0

    # -- names in scope

    def ints(self, f):
        return (f.scope[0] if f.scope else self.global_ints) + f.local_ints

    def ptrs(self, f):
        return (f.scope[1] if f.scope else self.global_ptrs) + f.local_ptrs + f.formal_ptrs

    def pptrs(self, f):
        return (f.scope[2] if f.scope else self.global_pptrs) + f.local_pptrs + f.formal_pptrs

    def structs(self, f):
        return f.scope[3] if f.scope else self.cfg.structs

    # -- generation

    def program(self) -> str:
        rng, cfg = self.rng, self.cfg
        nfuncs = rng.randint(1, cfg.max_functions)
        self.budget = rng.randint(max(4, cfg.max_statements // 3), cfg.max_statements)
        self.global_ints = [f"i{k}" for k in range(rng.randint(2, 4))]
        self.global_ptrs = [f"g{k}" for k in range(rng.randint(1, 3))]
        self.global_pptrs = [f"gg{k}" for k in range(rng.randint(0, 1))]
        funcs = [_Func("main", None, 0)]
        for k in range(1, nfuncs):
            funcs.append(_Func(f"f{k}", rng.choice(sorted(SIGS)), k))
        self.funcs = funcs
        self.fps = {}
        if cfg.function_pointers:
            for kind in FP_DECLS:
                if any(f.sig == kind for f in funcs[1:]) and rng.random() < 0.6:
                    self.fps[kind] = f"fp_{kind}"
        out = [HEADER]
        for name in self.global_ints:
            out.append(f"int {name};")
        for name in self.global_ptrs:
            init = rng.random()
            if init < 0.25:
                out.append(f"int *{name} = &{rng.choice(self.global_ints)};")
            else:
                out.append(f"int *{name};")
        for name in self.global_pptrs:
            out.append(f"int **{name};")
        if cfg.structs:
            out.append("struct S s0;")
            out.append("struct S *sp;")
        for kind, fp in self.fps.items():
            out.append(FP_DECLS[kind].format(fp=fp))
        out.append("")
        # bodies first (shares the statement budget), emitted callee-last
        per_func = max(2, self.budget // nfuncs)
        bodies = {}
        for f in reversed(funcs):
            bodies[f.name] = self.function(f, per_func)
        for f in funcs[1:]:
            out.extend(bodies[f.name])
            out.append("")
        out.extend(bodies["main"])
        return "\n".join(out) + "\n"

    def function(self, f: _Func, nstmts: int) -> list:
        rng = self.rng
        f.formal_ptrs, f.formal_pptrs = [], []
        if f.sig == "v1":
            f.formal_ptrs = ["x"]
        elif f.sig == "p2":
            f.formal_ptrs = ["x", "y"]
        elif f.sig == "v2":
            f.formal_pptrs = ["x"]
        f.local_ints = [f"l{k}" for k in range(rng.randint(0, 2))]
        f.local_ptrs = [f"p{k}" for k in range(rng.randint(1, 3))]
        f.local_pptrs = [f"q{k}" for k in range(rng.randint(0, 2))]
        decls = []
        for name in f.local_ints:
            decls.append(f"    int {name};")
        for name in f.local_ptrs:
            if rng.random() < 0.4:
                decls.append(f"    int *{name} = &{rng.choice(self.ints(f))};")
            else:
                decls.append(f"    int *{name};")
        for name in f.local_pptrs:
            decls.append(f"    int **{name};")
        self.budget -= len(decls)
        body = self.block(f, nstmts, 1)
        body += ["    " + self.invoke(f, g.name, g.sig) + ";" for g in f.must_call]
        if f.sig == "p2":
            self.budget -= 1
            body.append(f"    return {rng.choice(self.ptrs(f))};")
        if f.sig is None:
            head = "void main()"
        else:
            head = SIGS[f.sig][0].format(name=f.name)
        return [head + " {", *decls, *body, "}"]

    def block(self, f, n, depth) -> list:
        out = []
        for _ in range(n):
            if self.budget <= 0:
                break
            out.extend(self.statement(f, depth))
        return out

    def statement(self, f, depth) -> list:
        rng, cfg = self.rng, self.cfg
        ind = "    " * depth
        self.budget -= 1
        r = rng.random()
        if depth <= cfg.max_depth and r < 0.12:
            cond = rng.choice(self.ints(f))
            then = self.block(f, rng.randint(1, 3), depth + 1) or [ind + "    " + self.simple(f) + ";"]
            lines = [f"{ind}if ({cond}) {{", *then]
            if rng.random() < 0.6:
                orelse = self.block(f, rng.randint(1, 2), depth + 1) or [ind + "    " + self.simple(f) + ";"]
                lines += [f"{ind}}} else {{", *orelse]
            return lines + [f"{ind}}}"]
        if cfg.loops and depth <= cfg.max_depth and r < 0.18:
            cond = rng.choice(self.ints(f))
            body = self.block(f, rng.randint(1, 3), depth + 1) or [ind + "    " + self.simple(f) + ";"]
            return [f"{ind}while ({cond}) {{", *body, f"{ind}}}"]
        if r < 0.18 + cfg.call_rate:
            call = self.call(f)
            if call is not None:
                return [ind + call + ";"]
        return [ind + self.simple(f) + ";"]

    def callees(self, f, kind=None):
        out = []
        for g in self.funcs[1:]:
            if kind is not None and g.sig != kind:
                continue
            if self.cfg.acyclic and g.index <= f.index:
                continue
            if self.cfg.module_size and f.index and _module(f, self.cfg) != _module(g, self.cfg):
                continue
            if self.cfg.module_size and not f.index and (g.index - 1) % self.cfg.module_size:
                continue  # main calls module roots only
            out.append(g)
        return out

    def ptr_arg(self, f):
        rng = self.rng
        r = rng.random()
        if r < 0.35:
            return "&" + rng.choice(self.ints(f))
        if r < 0.45:
            return "0"
        if r < 0.55 and self.pptrs(f):
            return "*" + rng.choice(self.pptrs(f))
        return rng.choice(self.ptrs(f))

    def pptr_arg(self, f):
        rng = self.rng
        if self.pptrs(f) and rng.random() < 0.4:
            return rng.choice(self.pptrs(f))
        return "&" + rng.choice(self.ptrs(f))

    def call(self, f):
        rng = self.rng
        # indirect calls only from main in acyclic mode
        use_fp = self.fps and rng.random() < 0.3 and (not self.cfg.acyclic or f.index == 0)
        if use_fp:
            kind = rng.choice(sorted(self.fps))
            fp = self.fps[kind]
            targets = [g for g in self.funcs[1:] if g.sig == kind]
            if rng.random() < 0.5 and targets:
                return f"{fp} = {rng.choice(['&', ''])}{rng.choice(targets).name}"
            return self.invoke(f, fp, kind)
        gs = self.callees(f)
        if not gs:
            return None
        g = rng.choice(gs)
        return self.invoke(f, g.name, g.sig)

    def invoke(self, f, target, kind):
        rng = self.rng
        if kind == "v1":
            return f"{target}({self.ptr_arg(f)})"
        if kind == "v2":
            return f"{target}({self.pptr_arg(f)})"
        call = f"{target}({self.ptr_arg(f)}, {self.ptr_arg(f)})"
        if rng.random() < 0.7:
            return f"{rng.choice(self.ptrs(f))} = {call}"
        return call

    def simple(self, f) -> str:
        rng, cfg = self.rng, self.cfg
        ptrs, pptrs, ints = self.ptrs(f), self.pptrs(f), self.ints(f)
        p = rng.choice(ptrs)
        choices = [
            lambda: f"{p} = &{rng.choice(ints)}",
            lambda: f"{p} = {rng.choice(ptrs)}",
            lambda: f"*{p} = {rng.randint(0, 9)}",
            lambda: f"{rng.choice(ints)} = *{p}",
            lambda: f"{p} = 0",
        ]
        if pptrs:
            q = rng.choice(pptrs)
            choices += [
                lambda: f"{p} = *{q}",
                lambda: f"*{q} = {rng.choice(ptrs)}",
                lambda: f"{q} = &{rng.choice(ptrs)}",
                lambda: f"**{q} = {rng.randint(0, 9)}",
                lambda: f"*{q} = &{rng.choice(ints)}",
            ]
        if cfg.heap:
            choices.append(lambda: f"{p} = malloc(4)")
            if pptrs:
                choices.append(lambda: f"{rng.choice(pptrs)} = malloc(8)")
        if self.structs(f):
            choices += [
                lambda: "sp = &s0",
                lambda: f"sp->f = {rng.choice(ptrs)}",
                lambda: f"{p} = sp->f",
                lambda: f"s0.f = {rng.choice(ptrs)}",
                lambda: f"{p} = s0.f",
            ]
            if cfg.heap:
                choices.append(lambda: "sp = malloc(16)")
        return rng.choice(choices)()


def count_statements(src: str) -> int:
    """Declarations and statements inside function bodies (if/while count once)."""
    n, depth = 0, 0
    for line in src.splitlines():
        s = line.strip()
        if depth > 0 and s and s not in ("}", "} else {"):
            n += 1
        depth += line.count("{") - line.count("}")
        if s.startswith("struct S {"):
            depth = 0
    return n


def generate(seed: int, config: GenConfig | None = None) -> str:
    """A random program of at most ``max_functions`` functions and ``max_statements`` statements."""
    config = config or GenConfig()
    gen = ProgramGenerator(seed, config)
    while True:
        src = gen.program()
        if count_statements(src) <= config.max_statements:
            return src


def generate_large(seed: int = 0, target_lines: int = 2000, module_size: int = 5, call_rate: float = 0.06) -> str:
    """A program of roughly ``target_lines`` lines with an acyclic call graph.

    Functions are grouped into modules of ``module_size``. A function calls
    only later functions of its own module and main calls each module's first
    function. The functions of a module share a small subset of the globals.
    """
    cfg = GenConfig(max_functions=1, max_statements=10**9, acyclic=True, max_depth=2,
                    module_size=module_size, call_rate=call_rate)
    gen = ProgramGenerator(seed, cfg)
    rng = gen.rng
    nfuncs = max(2, target_lines // 28)
    gen.budget = 10**9
    gen.global_ints = [f"i{k}" for k in range(8)]
    gen.global_ptrs = [f"g{k}" for k in range(12)]
    gen.global_pptrs = [f"gg{k}" for k in range(3)]
    gen.funcs = [_Func("main", None, 0)] + [_Func(f"f{k}", rng.choice(sorted(SIGS)), k) for k in range(1, nfuncs)]
    scopes: dict = {}
    for f in gen.funcs:
        m = _module(f, cfg) if f.index else -1
        if m not in scopes:
            scopes[m] = (rng.sample(gen.global_ints, 2), rng.sample(gen.global_ptrs, 2),
                         rng.sample(gen.global_pptrs, 1), rng.random() < 0.5)
        f.scope = scopes[m]
    for f in gen.funcs[1:]:
        nxt = f.index + 1
        if nxt < nfuncs and _module(gen.funcs[nxt], cfg) == _module(f, cfg):
            f.must_call.append(gen.funcs[nxt])
    gen.funcs[0].must_call = [g for g in gen.funcs[1:] if (g.index - 1) % module_size == 0]
    gen.fps = {kind: f"fp_{kind}" for kind in FP_DECLS}
    out = [HEADER]
    out += [f"int {n};" for n in gen.global_ints]
    out += [f"int *{n};" for n in gen.global_ptrs]
    out += [f"int **{n};" for n in gen.global_pptrs]
    out += ["struct S s0;", "struct S *sp;"]
    out += [FP_DECLS[k].format(fp=fp) for k, fp in gen.fps.items()]
    bodies = {}
    for f in reversed(gen.funcs):
        bodies[f.name] = gen.function(f, 14)
    for f in gen.funcs[1:]:
        out.extend(bodies[f.name])
    out.extend(bodies["main"])
    return "\n".join(out) + "\n"
