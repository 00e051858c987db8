"""Lexer, AST and recursive-descent parser for the ``.mc`` C subset.

Supported: ``int``/``void``/``struct`` types, pointers of any depth, fixed-size
arrays, function pointers ``int (*fp)(int *)``, ``const`` pointers, globals
and locals, ``if``/``else``, ``while``, ``return``, calls and the usual scalar
operators. No casts, pointer arithmetic, ``goto``, unions or preprocessor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ParseError, SemanticError

# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class IntT:
    def __str__(self):
        return "int"


@dataclass(frozen=True)
class VoidT:
    def __str__(self):
        return "void"


@dataclass(frozen=True)
class StructT:
    name: str

    def __str__(self):
        return f"struct {self.name}"


@dataclass(frozen=True)
class PtrT:
    target: object

    def __str__(self):
        return f"{self.target}*"


@dataclass(frozen=True)
class ArrayT:
    elem: object
    size: int

    def __str__(self):
        return f"{self.elem}[{self.size}]"


@dataclass(frozen=True)
class FuncT:
    ret: object
    params: tuple = ()
    variadic: bool = False

    def __str__(self):
        ps = ", ".join(map(str, self.params)) + (", ..." if self.variadic else "")
        return f"{self.ret}({ps})"


INT = IntT()
VOID = VoidT()


def is_pointer(t) -> bool:
    return isinstance(t, PtrT)


def is_func_pointer(t) -> bool:
    return isinstance(t, PtrT) and isinstance(t.target, FuncT)


# ---------------------------------------------------------------------------
# AST


@dataclass
class Node:
    line: int
    col: int


@dataclass
class Name(Node):
    ident: str


@dataclass
class IntLit(Node):
    value: int


@dataclass
class Unary(Node):
    op: str
    operand: Node


@dataclass
class Binary(Node):
    op: str
    left: Node
    right: Node


@dataclass
class Index(Node):
    base: Node
    index: Node


@dataclass
class Member(Node):
    base: Node
    ident: str
    arrow: bool


@dataclass
class CallExpr(Node):
    func: Node
    args: list


@dataclass
class SizeOf(Node):
    pass


@dataclass
class Decl(Node):
    ident: str
    type: object
    const: bool = False
    init: Node | None = None


@dataclass
class Assign(Node):
    target: Node
    value: Node


@dataclass
class ExprStmt(Node):
    expr: Node


@dataclass
class If(Node):
    cond: Node
    then: list
    orelse: list | None


@dataclass
class While(Node):
    cond: Node
    body: list


@dataclass
class Return(Node):
    value: Node | None


@dataclass
class Block(Node):
    body: list


@dataclass
class FuncDef(Node):
    ident: str
    type: FuncT
    params: list  # list of (name, type)
    body: list | None  # None for a prototype
    file: str = "<input>"


@dataclass
class StructDef(Node):
    ident: str
    fields: list  # list of (name, type)


@dataclass
class TranslationUnit:
    file: str
    structs: list = field(default_factory=list)
    globals: list = field(default_factory=list)  # list of Decl
    functions: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# lexer

KEYWORDS = {"int", "void", "char", "struct", "const", "if", "else", "while", "return", "sizeof"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<linecomment>//[^\n]*)
  | (?P<blockcomment>/\*.*?\*/)
  | (?P<num>0[xX][0-9a-fA-F]+|\d+)
  | (?P<ident>[A-Za-z_]\w*)
  | (?P<op>\.\.\.|->|<=|>=|==|!=|&&|\|\||[{}()\[\];,*&=.+\-/%<>!])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class Token:
    kind: str  # "num", "ident", "kw", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", file, line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "blockcomment":
            nls = chunk.count("\n")
            if nls:
                line += nls
                line_start = pos + chunk.rfind("\n") + 1
        elif kind == "ident":
            tokens.append(Token("kw" if chunk in KEYWORDS else "ident", chunk, line, col))
        elif kind in ("num", "op"):
            tokens.append(Token(kind, chunk, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# parser

_BINARY_PREC = [
    {"||"},
    {"&&"},
    {"==", "!="},
    {"<", ">", "<=", ">="},
    {"+", "-"},
    {"*", "/", "%"},
]


class Parser:
    def __init__(self, text: str, file: str = "<input>"):
        self.file = file
        self.toks = tokenize(text, file)
        self.i = 0
        self.unit = TranslationUnit(file)

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, n: int = 1) -> Token:
        return self.toks[min(self.i + n, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        return ParseError(msg, self.file, tok.line, tok.col)

    def next(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of file"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.next()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.error(f"expected identifier, found {self.tok.text or 'end of file'!r}")
        return self.next()

    def starts_type(self) -> bool:
        return self.tok.kind == "kw" and self.tok.text in ("int", "void", "char", "struct", "const")

    # -- declarations

    def parse(self) -> TranslationUnit:
        while self.tok.kind != "eof":
            self.top_level()
        return self.unit

    def decl_specs(self):
        """Parse ``[const] base [const]``; returns (type, const-flag)."""
        const = False
        if self.at("const"):
            self.next()
            const = True
        t = self.tok
        if t.text in ("int", "char"):
            self.next()
            base = INT
        elif t.text == "void":
            self.next()
            base = VOID
        elif t.text == "struct":
            self.next()
            base = StructT(self.expect_ident().text)
        else:
            raise self.error(f"expected a type, found {t.text or 'end of file'!r}")
        if self.at("const"):
            self.next()
            const = True
        return base, const

    def stars(self, base):
        """Consume ``*`` (with optional ``const``) and wrap ``base``."""
        const = False
        while self.at("*"):
            self.next()
            base = PtrT(base)
            if self.at("const"):
                self.next()
                const = True
        return base, const

    def declarator(self, base, allow_abstract=False):
        """Parse a declarator after the specifiers. Returns (name-token|None, type, const)."""
        t, const = self.stars(base)
        if self.at("(") and self.peek().text == "*":
            self.next()
            self.next()
            name = self.expect_ident()
            self.expect(")")
            self.expect("(")
            params, variadic = self.param_list(named=False)
            return name, PtrT(FuncT(t, tuple(p for _, p in params), variadic)), const
        if self.tok.kind != "ident":
            if allow_abstract:
                return None, t, const
            raise self.error(f"expected identifier, found {self.tok.text or 'end of file'!r}")
        name = self.next()
        if self.at("["):
            self.next()
            if self.tok.kind != "num":
                raise self.error("array size must be an integer literal")
            size = int(self.next().text, 0)
            self.expect("]")
            t = ArrayT(t, size)
        return name, t, const

    def param_list(self, named: bool):
        """Parse parameters up to and including ``)``."""
        params = []
        variadic = False
        if self.at(")"):
            self.next()
            return params, variadic
        if self.at("void") and self.peek().text == ")":
            self.next()
            self.next()
            return params, variadic
        while True:
            if self.at("..."):
                self.next()
                variadic = True
                break
            base, _ = self.decl_specs()
            name, t, _ = self.declarator(base, allow_abstract=True)
            if isinstance(t, ArrayT):
                t = PtrT(t.elem)
            if named and name is None:
                raise self.error("parameter needs a name in a function definition")
            params.append((name.text if name else None, t))
            if not self.at(","):
                break
            self.next()
        self.expect(")")
        return params, variadic

    def top_level(self):
        if self.at("struct") and self.peek(2).text == "{":
            self.struct_def()
            return
        start = self.tok
        base, const = self.decl_specs()
        t, ptr_const = self.stars(base)
        if self.tok.kind == "ident" and self.peek().text == "(":
            self.function(start, t)
            return
        # re-parse as a declaration list with the pointer part included
        self.i_rewind_to(start)
        base, const = self.decl_specs()
        for decl in self.decl_list(base, const):
            self.unit.globals.append(decl)

    def i_rewind_to(self, tok: Token):
        self.i = self.toks.index(tok)

    def struct_def(self):
        start = self.expect("struct")
        name = self.expect_ident().text
        self.expect("{")
        fields = []
        while not self.at("}"):
            base, _ = self.decl_specs()
            while True:
                ftok, ft, _ = self.declarator(base)
                if isinstance(ft, ArrayT):
                    raise SemanticError("array fields are not supported", self.file, ftok.line, ftok.col)
                fields.append((ftok.text, ft))
                if not self.at(","):
                    break
                self.next()
            self.expect(";")
        self.expect("}")
        self.expect(";")
        self.unit.structs.append(StructDef(start.line, start.col, name, fields))

    def decl_list(self, base, const):
        decls = []
        while True:
            name, t, ptr_const = self.declarator(base)
            init = None
            if self.at("="):
                self.next()
                init = self.expr()
            is_const = (const or ptr_const) and is_pointer(t)
            decls.append(Decl(name.line, name.col, name.text, t, is_const, init))
            if not self.at(","):
                break
            self.next()
        self.expect(";")
        return decls

    def function(self, start: Token, ret):
        name = self.expect_ident()
        self.expect("(")
        params, variadic = self.param_list(named=False)
        ftype = FuncT(ret, tuple(p for _, p in params), variadic)
        if self.at(";"):
            self.next()
            self.unit.functions.append(FuncDef(name.line, name.col, name.text, ftype, params, None, self.file))
            return
        if any(p is None for p, _ in params):
            raise self.error("parameter needs a name in a function definition", name)
        body = self.block()
        self.unit.functions.append(FuncDef(name.line, name.col, name.text, ftype, params, body, self.file))

    # -- statements

    def block(self) -> list:
        self.expect("{")
        body = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            body.extend(self.statement())
        self.expect("}")
        return body

    def statement(self) -> list:
        t = self.tok
        if self.starts_type():
            base, const = self.decl_specs()
            return self.decl_list(base, const)
        if self.at("{"):
            return [Block(t.line, t.col, self.block())]
        if self.at(";"):
            self.next()
            return []
        if self.at("if"):
            self.next()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.body_of()
            orelse = None
            if self.at("else"):
                self.next()
                orelse = self.body_of()
            return [If(t.line, t.col, cond, then, orelse)]
        if self.at("while"):
            self.next()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return [While(t.line, t.col, cond, self.body_of())]
        if self.at("return"):
            self.next()
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return [Return(t.line, t.col, value)]
        target = self.expr()
        if self.at("="):
            self.next()
            value = self.expr()
            self.expect(";")
            return [Assign(t.line, t.col, target, value)]
        self.expect(";")
        return [ExprStmt(t.line, t.col, target)]

    def body_of(self) -> list:
        if self.at("{"):
            return self.block()
        return self.statement()

    # -- expressions

    def expr(self, level: int = 0) -> Node:
        if level == len(_BINARY_PREC):
            return self.unary()
        left = self.expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in _BINARY_PREC[level]:
            op = self.next()
            right = self.expr(level + 1)
            left = Binary(op.line, op.col, op.text, left, right)
        return left

    def unary(self) -> Node:
        t = self.tok
        if t.kind == "op" and t.text in ("*", "&", "-", "!"):
            self.next()
            return Unary(t.line, t.col, t.text, self.unary())
        if self.at("sizeof"):
            self.next()
            self.expect("(")
            if self.starts_type():
                base, _ = self.decl_specs()
                self.stars(base)
            else:
                self.expr()
            self.expect(")")
            return SizeOf(t.line, t.col)
        return self.postfix(self.primary())

    def primary(self) -> Node:
        t = self.tok
        if t.kind == "ident":
            self.next()
            return Name(t.line, t.col, t.text)
        if t.kind == "num":
            self.next()
            return IntLit(t.line, t.col, int(t.text, 0))
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        raise self.error(f"expected an expression, found {t.text or 'end of file'!r}")

    def postfix(self, e: Node) -> Node:
        while True:
            t = self.tok
            if self.at("("):
                self.next()
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.expr())
                        if not self.at(","):
                            break
                        self.next()
                self.expect(")")
                e = CallExpr(e.line, e.col, e, args)
            elif self.at("["):
                self.next()
                idx = self.expr()
                self.expect("]")
                e = Index(e.line, e.col, e, idx)
            elif self.at(".") or self.at("->"):
                self.next()
                name = self.expect_ident()
                e = Member(e.line, e.col, e, name.text, t.text == "->")
            else:
                return e


def parse(text: str, file: str = "<input>") -> TranslationUnit:
    """Parse one source file into a translation unit."""
    return Parser(text, file).parse()
