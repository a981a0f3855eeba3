"""Recursive-descent parser for models (.odpm), systems (.odps) and traces (.odpt).

Grammar (EBNF):

    model      = "model" IDENT "{" { decl } "}"
    decl       = template | action | type | role | invariant | static | dynamic
    template   = "template" IDENT "{" { tfield } "}"
    tfield     = ( "parents" | "types" | "actions" | "dynamic" | "static"
                 | "invariant" ) ":" [ ids ] ";"
               | "attrs" "{" { IDENT ":" sort ";" } "}"
               | "tags" ":" tag { "," tag } ";"
    tag        = IDENT "." IDENT                         // management.node
    action     = "action" IDENT "{" "participants" ":" ids ";"
                 "start" ":" IDENT ";" "end" ":" IDENT ";" [ "types" ":" ids ";" ] "}"
    type       = "type" IDENT "{" [ "predicate" ":" pred ";" ]
                 [ "subtypes" ":" ids ";" ] [ "supertypes" ":" ids ";" ] "}"
    role       = "role" IDENT "{" "source" ":" ids ";" "target" ":" ids ";"
                 [ "card" ":" INT ".." ( INT | "*" ) ";" ] [ "inverse" ":" IDENT ";" ]
                 [ "scope" ":" ( "global" | "per-source" ) ";" ] "}"
    invariant  = "invariant" IDENT "{" pred [ ";" ] "}"
    static     = "static" IDENT "at" IDENT "{" pred [ ";" ] "}"
    dynamic    = "dynamic" IDENT "{" { rule } "}"
    rule       = "rule" IDENT ":" IDENT "(" param { "," param } ")" "{"
                 [ "pre" ":" pred ";" ] [ "effects" "{" { effect } "}" ] [ "post" ":" pred ";" ] "}"
    param      = IDENT ":" IDENT
    effect     = IDENT "." IDENT ":=" pred ";"
               | "create" IDENT ":" IDENT ( inits [ ";" ] | ";" )
               | "delete" IDENT ";"
               | "reclassify" IDENT "as" IDENT ( inits [ ";" ] | ";" )
               | ( "link" | "unlink" ) IDENT "(" IDENT "->" IDENT ")" ";"
    inits      = "{" { IDENT "=" pred ";" } "}"

    system     = "system" IDENT "conforms" IDENT "{" { item } "}"
    item       = "object" IDENT ":" ids ( ";" | state [ ";" ] )
               | "link" IDENT ":" IDENT "(" IDENT "->" IDENT ")" ";"
               | "time" IDENT ( ";" | "{" { IDENT state } "}" [ ";" ] )
               | "node" IDENT [ "accepts" STRING { "," STRING } ]
                 "{" { "capsule" IDENT "{" { "cluster" IDENT "{" [ ids ] "}" } "}" } "}"
               | "travel" IDENT [ "from" IDENT [ "." IDENT "." IDENT ] ] "to" IDENT ";"
    state      = "{" { IDENT "=" value ";" } "}"

    trace      = "trace" IDENT "of" IDENT [ "seed" INT ] [ "steps" INT ]
                 "{" system { step system } "}"
    step       = "step" IDENT "(" [ IDENT "=" IDENT { "," IDENT "=" IDENT } ] ")"
                 ( "internal" | "interaction" )
                 ( ";" | "{" { ( "pre" | "post" ) IDENT IDENT ( "start" | "end" ) ";" } "}" )

    pred       = implies
    implies    = or [ "implies" implies ]
    or         = and { "or" and }
    and        = not { "and" not }
    not        = "not" not | compare
    compare    = add [ ( "=" | "<>" | "<" | "<=" | ">" | ">=" ) add ]
    add        = mul { ( "+" | "-" ) mul }
    mul        = unary { "*" unary }
    unary      = "-" unary | postfix
    postfix    = primary { "." IDENT [ "~" ] [ "(" pred ")" ] }
    primary    = INT | STRING | "true" | "false" | "@" IDENT | IDENT | "(" pred ")"
               | ( "forall" | "exists" ) IDENT ":" IDENT "." pred

Parsing never raises on malformed text. Syntax errors are reported with
spans, and the parser resumes at the next declaration.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Generic, List, Mapping, Optional, Tuple, TypeVar, Union

from odpcheck.constraints.ast import (
    COMPARE_OPS,
    SET_OPS,
    SET_OPS_WITH_ARG,
    Arith,
    BoolOp,
    Compare,
    Expr,
    Lit,
    Member,
    Not,
    ObjectConst,
    Quant,
    SetOp,
    Var,
    resolve_members,
)
from odpcheck.constraints.typecheck import ANY_OBJECT, BOOL, Kind, PSort, object_of, sort_psort, typecheck_expr
from odpcheck.dsl.lexer import TT, Token, tokenize
from odpcheck.dsl.spans import ParseReport, SourceSpan
from odpcheck.dynamics.schema import AddLink, Assign, Create, Delete, DynamicRule, Reclassify, RemoveLink
from odpcheck.dynamics.trace import Step, Trace
from odpcheck.engineering.containment import Capsule, Cluster, Containment, ContainmentPath, Node
from odpcheck.engineering.tags import EngineeringTag
from odpcheck.errors import OdpCheckError
from odpcheck.instance import (
    BoundState,
    ConditionBinding,
    ConditionKind,
    Link,
    ObjectInstance,
    System,
    TravelRequest,
)
from odpcheck.metamodel import (
    ActionKind,
    ActionTemplate,
    CountingScope,
    DynamicSchema,
    InvariantSchema,
    Model,
    ObjectTemplate,
    Role,
    StaticSchema,
    Type,
)
from odpcheck.sorts import Sort, Value

T = TypeVar("T")

MODEL_DECLS = ("template", "action", "type", "role", "invariant", "static", "dynamic")
SYSTEM_ITEMS = ("object", "link", "time", "node", "travel")
_SORTS = {s.value: s for s in Sort}


@dataclass
class ParseResult(Generic[T]):
    """Parsed value (``None`` on failure) plus every diagnostic, warnings included."""

    value: Optional[T]
    report: ParseReport = field(default_factory=ParseReport)

    @property
    def ok(self) -> bool:
        return self.value is not None and not self.report.failed

    def unwrap(self) -> Union[T, ParseReport]:
        return self.value if self.ok else self.report  # type: ignore[return-value]


class _SyntaxError(Exception):
    def __init__(self, span: SourceSpan, message: str):
        super().__init__(message)
        self.span = span
        self.message = message


def _describe(tok: Token) -> str:
    return "end of input" if tok.type == TT.EOF else repr(tok.value)


@dataclass
class _RawRule:
    rule: DynamicRule
    schema: str
    action_tok: Token
    param_toks: List[Tuple[Token, Token]]


class _Parser:
    def __init__(self, text: str, file: str):
        self.file = file
        self.report = ParseReport()
        self.tokens = tokenize(text, file, self.report)
        self.pos = 0

    # -- token access -------------------------------------------------------

    def _peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def _advance(self) -> Token:
        tok = self._peek()
        if tok.type != TT.EOF:
            self.pos += 1
        return tok

    def _check(self, type_: str, value: Optional[str] = None) -> bool:
        return self._peek().is_(type_, value)

    def _match(self, type_: str, value: Optional[str] = None) -> Optional[Token]:
        return self._advance() if self._check(type_, value) else None

    def _expect(self, type_: str, value: Optional[str] = None, what: Optional[str] = None) -> Token:
        tok = self._peek()
        if not tok.is_(type_, value):
            expected = what or (repr(value) if value else type_.lower())
            raise _SyntaxError(tok.span, f"expected {expected}, got {_describe(tok)}")
        return self._advance()

    def _punct(self, p: str) -> Token:
        return self._expect(TT.PUNCT, p)

    def _keyword(self, k: str) -> Token:
        return self._expect(TT.KEYWORD, k)

    def _ident(self, what: str = "identifier") -> Token:
        return self._expect(TT.IDENT, what=what)

    def _word(self, value: str) -> Token:
        """A contextual word: an identifier or keyword spelled ``value``."""
        tok = self._peek()
        if tok.type in (TT.IDENT, TT.KEYWORD) and tok.value == value:
            return self._advance()
        raise _SyntaxError(tok.span, f"expected {value!r}, got {_describe(tok)}")

    def _span_from(self, start: Token) -> SourceSpan:
        last = self.tokens[max(self.pos - 1, 0)]
        return start.span.merge(last.span) if last.span >= start.span else start.span

    def _error(self, err: _SyntaxError) -> None:
        self.report.error(err.span, err.message)

    def _recover(self, start_pos: int, stops: Tuple[str, ...]) -> None:
        """Skip the broken declaration starting at ``start_pos``."""
        self.pos = start_pos
        depth = 0
        first = True
        while True:
            tok = self._peek()
            if tok.type == TT.EOF:
                return
            if depth == 0 and not first:
                if tok.is_(TT.PUNCT, "}") or (tok.type == TT.KEYWORD and tok.value in stops):
                    return
            if depth == 0 and first and tok.is_(TT.PUNCT, "}"):
                return
            first = False
            self._advance()
            if tok.is_(TT.PUNCT, "{"):
                depth += 1
            elif tok.is_(TT.PUNCT, "}"):
                depth -= 1
                if depth <= 0:
                    self._match(TT.PUNCT, ";")
                    return

    def _close(self, start: Token, what: str) -> bool:
        try:
            self._punct("}")
        except _SyntaxError as err:
            self.report.error(err.span, f"unterminated {what} (opened at {start.span})")
            return False
        return True

    def _expect_eof(self) -> None:
        tok = self._peek()
        if tok.type != TT.EOF:
            self.report.error(tok.span, f"unexpected {_describe(tok)} after the end of the file's declaration")

    # -- shared pieces ------------------------------------------------------

    def _id_list(self) -> List[Token]:
        """Comma-separated identifiers, possibly empty (terminated by ``;`` or ``}``)."""
        if self._check(TT.PUNCT, ";") or self._check(TT.PUNCT, "}"):
            return []
        out = [self._ident()]
        while self._match(TT.PUNCT, ","):
            out.append(self._ident())
        return out

    def _labelled_ids(self) -> List[Token]:
        self._punct(":")
        ids = self._id_list()
        self._punct(";")
        return ids

    def _int(self) -> int:
        neg = self._match(TT.PUNCT, "-")
        tok = self._expect(TT.INT, what="integer")
        return -int(tok.value) if neg else int(tok.value)

    def _value(self) -> Value:
        tok = self._peek()
        if tok.type == TT.STRING:
            return self._advance().value
        if tok.is_(TT.KEYWORD, "true") or tok.is_(TT.KEYWORD, "false"):
            return self._advance().value == "true"
        if tok.type == TT.INT or tok.is_(TT.PUNCT, "-"):
            return self._int()
        raise _SyntaxError(tok.span, f"expected a value, got {_describe(tok)}")

    def _state_block(self, owner: str) -> Dict[str, Value]:
        self._punct("{")
        state: Dict[str, Value] = {}
        while not self._match(TT.PUNCT, "}"):
            name = self._ident("attribute name")
            if name.value in state:
                raise _SyntaxError(name.span, f"duplicate attribute {name.value} in {owner}")
            self._punct("=")
            state[name.value] = self._value()
            self._punct(";")
        return state

    # -- predicates -----------------------------------------------------------

    def expr(self) -> Expr:
        return self._implies()

    def _implies(self) -> Expr:
        start = self._peek()
        left = self._or()
        if self._match(TT.KEYWORD, "implies"):
            right = self._implies()
            return BoolOp("implies", left, right, span=self._span_from(start))
        return left

    def _or(self) -> Expr:
        start = self._peek()
        left = self._and()
        while self._match(TT.KEYWORD, "or"):
            left = BoolOp("or", left, self._and(), span=self._span_from(start))
        return left

    def _and(self) -> Expr:
        start = self._peek()
        left = self._not()
        while self._match(TT.KEYWORD, "and"):
            left = BoolOp("and", left, self._not(), span=self._span_from(start))
        return left

    def _not(self) -> Expr:
        start = self._match(TT.KEYWORD, "not")
        if start:
            return Not(self._not(), span=self._span_from(start))
        return self._compare()

    def _compare(self) -> Expr:
        start = self._peek()
        left = self._additive()
        tok = self._peek()
        if tok.type == TT.PUNCT and tok.value in COMPARE_OPS:
            self._advance()
            right = self._additive()
            nxt = self._peek()
            if nxt.type == TT.PUNCT and nxt.value in COMPARE_OPS:
                raise _SyntaxError(nxt.span, "comparisons do not chain; add parentheses")
            return Compare(tok.value, left, right, span=self._span_from(start))
        return left

    def _additive(self) -> Expr:
        start = self._peek()
        left = self._mul()
        while self._check(TT.PUNCT, "+") or self._check(TT.PUNCT, "-"):
            op = self._advance().value
            left = Arith(op, left, self._mul(), span=self._span_from(start))
        return left

    def _mul(self) -> Expr:
        start = self._peek()
        left = self._unary()
        while self._match(TT.PUNCT, "*"):
            left = Arith("*", left, self._unary(), span=self._span_from(start))
        return left

    def _unary(self) -> Expr:
        start = self._match(TT.PUNCT, "-")
        if start is None:
            return self._postfix()
        if self._check(TT.INT):
            tok = self._advance()
            return Lit(-int(tok.value), span=self._span_from(start))
        operand = self._unary()
        return Arith("-", Lit(0, span=start.span), operand, span=self._span_from(start))

    def _postfix(self) -> Expr:
        start = self._peek()
        e = self._primary()
        while self._match(TT.PUNCT, "."):
            name = self._ident("attribute, role or set operation")
            inverse = self._match(TT.PUNCT, "~") is not None
            if name.value in SET_OPS and not inverse:
                arg = None
                if name.value in SET_OPS_WITH_ARG:
                    self._punct("(")
                    arg = self.expr()
                    self._punct(")")
                elif self._match(TT.PUNCT, "("):
                    self._punct(")")
                e = SetOp(name.value, e, arg, span=self._span_from(start))
            else:
                e = Member(e, name.value, inverse, span=self._span_from(start))
        return e

    def _primary(self) -> Expr:
        tok = self._peek()
        if tok.type == TT.INT:
            self._advance()
            return Lit(int(tok.value), span=tok.span)
        if tok.type == TT.STRING:
            self._advance()
            return Lit(tok.value, span=tok.span)
        if tok.is_(TT.KEYWORD, "true") or tok.is_(TT.KEYWORD, "false"):
            self._advance()
            return Lit(tok.value == "true", span=tok.span)
        if tok.type == TT.OBJREF:
            self._advance()
            return ObjectConst(tok.value, span=tok.span)
        if tok.type == TT.IDENT:
            self._advance()
            return Var(tok.value, span=tok.span)
        if tok.is_(TT.PUNCT, "("):
            self._advance()
            inner = self.expr()
            self._punct(")")
            return inner
        if tok.is_(TT.KEYWORD, "forall") or tok.is_(TT.KEYWORD, "exists"):
            self._advance()
            var = self._ident("quantified variable")
            self._punct(":")
            domain = self._ident("template or type name")
            self._punct(".")
            body = self.expr()
            return Quant(tok.value, var.value, domain.value, body, span=self._span_from(tok))
        raise _SyntaxError(tok.span, f"expected an expression, got {_describe(tok)}")

    # -- models -------------------------------------------------------------

    def parse_model(self) -> Optional[Model]:
        try:
            start = self._keyword("model")
            name = self._ident("model name")
            self._punct("{")
        except _SyntaxError as err:
            self._error(err)
            return None
        b = _ModelBuilder(self, name.value)
        while not self._check(TT.PUNCT, "}") and not self._check(TT.EOF):
            begin = self.pos
            try:
                self._declaration(b)
            except _SyntaxError as err:
                self._error(err)
                self._recover(begin, MODEL_DECLS)
        self._close(start, f"model {name.value}")
        self._expect_eof()
        return b.build(self._span_from(start))

    def _declaration(self, b: "_ModelBuilder") -> None:
        tok = self._peek()
        if tok.type != TT.KEYWORD or tok.value not in MODEL_DECLS:
            raise _SyntaxError(tok.span, f"expected a declaration ({', '.join(MODEL_DECLS)}), got {_describe(tok)}")
        getattr(self, f"_{tok.value}_decl")(b)

    def _template_decl(self, b: "_ModelBuilder") -> None:
        kw = self._advance()
        name = self._ident("template name")
        self._punct("{")
        refs: Dict[str, List[Token]] = {}
        attributes: Dict[str, Sort] = {}
        tags: List[EngineeringTag] = []
        seen = set()
        while not self._match(TT.PUNCT, "}"):
            label = self._peek()
            if label.type not in (TT.IDENT, TT.KEYWORD):
                raise _SyntaxError(label.span, f"expected a template field, got {_describe(label)}")
            if label.value in seen:
                raise _SyntaxError(label.span, f"duplicate field {label.value} in template {name.value}")
            seen.add(label.value)
            self._advance()
            if label.value == "attrs":
                self._punct("{")
                while not self._match(TT.PUNCT, "}"):
                    attr = self._ident("attribute name")
                    self._punct(":")
                    sort = self._ident("sort")
                    if sort.value not in _SORTS:
                        raise _SyntaxError(sort.span, f"unknown sort {sort.value} (expected int, bool or string)")
                    if attr.value in attributes:
                        raise _SyntaxError(attr.span, f"duplicate attribute {attr.value} in template {name.value}")
                    attributes[attr.value] = _SORTS[sort.value]
                    self._punct(";")
            elif label.value in ("parents", "types", "actions", "dynamic", "static", "invariant"):
                refs[label.value] = self._labelled_ids()
            elif label.value == "tags":
                self._punct(":")
                tags.append(self._tag())
                while self._match(TT.PUNCT, ","):
                    tags.append(self._tag())
                self._punct(";")
            else:
                raise _SyntaxError(label.span, f"unknown template field {label.value}")

        def names(key: str) -> frozenset:
            return frozenset(t.value for t in refs.get(key, []))

        t = ObjectTemplate(
            name=name.value,
            parents=names("parents"),
            attributes=attributes,
            types=names("types"),
            actions=names("actions"),
            dynamic_schemas=names("dynamic"),
            static_schemas=names("static"),
            invariant_schemas=names("invariant"),
            tags=frozenset(tags),
            span=self._span_from(kw),
        )
        for ref in refs.get("parents", []):
            b.template_refs.append(ref)
        b.add("template", name, t)

    def _tag(self) -> EngineeringTag:
        group = self._ident("function group")
        self._punct(".")
        # node, object, cluster and capsule are keywords elsewhere
        function = self._peek()
        if function.type not in (TT.IDENT, TT.KEYWORD):
            raise _SyntaxError(function.span, f"expected a function name, got {_describe(function)}")
        self._advance()
        try:
            return EngineeringTag.parse(f"{group.value}.{function.value}")
        except ValueError as err:
            raise _SyntaxError(group.span.merge(function.span), str(err)) from None

    def _action_decl(self, b: "_ModelBuilder") -> None:
        kw = self._advance()
        name = self._ident("action name")
        self._punct("{")
        fields_: Dict[str, object] = {}
        while not self._match(TT.PUNCT, "}"):
            label = self._peek()
            if label.type not in (TT.IDENT, TT.KEYWORD) or label.value not in (
                "participants", "start", "end", "types",
            ):
                raise _SyntaxError(label.span, f"unknown action field {label.value or _describe(label)}")
            if label.value in fields_:
                raise _SyntaxError(label.span, f"duplicate field {label.value} in action {name.value}")
            self._advance()
            if label.value in ("start", "end"):
                self._punct(":")
                fields_[label.value] = self._ident("state label").value
                self._punct(";")
            else:
                fields_[label.value] = self._labelled_ids()
        participants: List[Token] = fields_.get("participants", [])  # type: ignore[assignment]
        if not participants:
            raise _SyntaxError(name.span, f"action {name.value} needs at least one participant")
        for label in ("start", "end"):
            if label not in fields_:
                raise _SyntaxError(name.span, f"action {name.value} lacks a {label} label")
        b.template_refs.extend(participants)
        a = ActionTemplate(
            name=name.value,
            participants=tuple(t.value for t in participants),
            start_label=fields_["start"],  # type: ignore[arg-type]
            end_label=fields_["end"],  # type: ignore[arg-type]
            types=frozenset(t.value for t in fields_.get("types", [])),  # type: ignore[union-attr]
            span=self._span_from(kw),
        )
        b.add("action", name, a)

    def _type_decl(self, b: "_ModelBuilder") -> None:
        kw = self._advance()
        name = self._ident("type name")
        self._punct("{")
        predicate: Expr = Lit(True)
        lists: Dict[str, List[Token]] = {}
        seen = set()
        while not self._match(TT.PUNCT, "}"):
            label = self._peek()
            if label.value in seen:
                raise _SyntaxError(label.span, f"duplicate field {label.value} in type {name.value}")
            seen.add(label.value)
            if label.is_(TT.IDENT, "predicate"):
                self._advance()
                self._punct(":")
                predicate = self.expr()
                self._punct(";")
            elif label.is_(TT.IDENT, "subtypes") or label.is_(TT.IDENT, "supertypes"):
                self._advance()
                lists[label.value] = self._labelled_ids()
            else:
                raise _SyntaxError(label.span, f"unknown type field {label.value or _describe(label)}")
        t = Type(
            name=name.value,
            predicate=predicate,
            declared_subtypes=frozenset(x.value for x in lists.get("subtypes", [])),
            declared_supertypes=frozenset(x.value for x in lists.get("supertypes", [])),
            span=self._span_from(kw),
        )
        b.add("type", name, t)

    def _role_decl(self, b: "_ModelBuilder") -> None:
        kw = self._advance()
        name = self._ident("role name")
        self._punct("{")
        ends: Dict[str, List[Token]] = {}
        lower, upper = 0, None
        inverse: Optional[Token] = None
        scope = CountingScope.GLOBAL
        card_span = name.span
        seen = set()
        while not self._match(TT.PUNCT, "}"):
            label = self._peek()
            if label.value in seen:
                raise _SyntaxError(label.span, f"duplicate field {label.value} in role {name.value}")
            seen.add(label.value)
            if label.is_(TT.IDENT, "source") or label.is_(TT.IDENT, "target"):
                self._advance()
                ends[label.value] = self._labelled_ids()
            elif label.is_(TT.IDENT, "card"):
                self._advance()
                self._punct(":")
                lo = self._peek()
                lower = self._int()
                self._punct("..")
                upper = None if self._match(TT.PUNCT, "*") else self._int()
                card_span = self._span_from(lo)
                self._punct(";")
            elif label.is_(TT.IDENT, "inverse"):
                self._advance()
                self._punct(":")
                inverse = self._ident("role name")
                self._punct(";")
            elif label.is_(TT.IDENT, "scope"):
                self._advance()
                self._punct(":")
                tok = self._ident("global or per-source")
                try:
                    scope = CountingScope(tok.value)
                except ValueError:
                    raise _SyntaxError(tok.span, f"unknown counting scope {tok.value}") from None
                self._punct(";")
            else:
                raise _SyntaxError(label.span, f"unknown role field {label.value or _describe(label)}")
        for end in ("source", "target"):
            if not ends.get(end):
                raise _SyntaxError(name.span, f"role {name.value} declares no {end} template")
            b.template_refs.extend(ends[end])
        try:
            r = Role(
                name=name.value,
                source_templates=frozenset(t.value for t in ends["source"]),
                target_templates=frozenset(t.value for t in ends["target"]),
                lower_bound=lower,
                upper_bound=upper,
                inverse=inverse.value if inverse else None,
                scope=scope,
                span=self._span_from(kw),
            )
        except ValueError as err:
            raise _SyntaxError(card_span, str(err)) from None
        if inverse is not None:
            b.inverse_refs.append((name.value, inverse))
        b.add("role", name, r)

    def _predicate_block(self) -> Expr:
        self._punct("{")
        p = self.expr()
        self._match(TT.PUNCT, ";")
        self._punct("}")
        return p

    def _invariant_decl(self, b: "_ModelBuilder") -> None:
        kw = self._advance()
        name = self._ident("schema name")
        p = self._predicate_block()
        b.add("invariant", name, InvariantSchema(name.value, p, span=self._span_from(kw)))

    def _static_decl(self, b: "_ModelBuilder") -> None:
        kw = self._advance()
        name = self._ident("schema name")
        self._keyword("at")
        label = self._ident("time label")
        p = self._predicate_block()
        b.add("static", name, StaticSchema(name.value, label.value, p, span=self._span_from(kw)))

    def _dynamic_decl(self, b: "_ModelBuilder") -> None:
        kw = self._advance()
        name = self._ident("schema name")
        self._punct("{")
        rules: Dict[str, DynamicRule] = {}
        while not self._match(TT.PUNCT, "}"):
            raw = self._rule(name.value)
            if raw.rule.name in rules:
                self.report.error(raw.rule.span, f"duplicate rule {raw.rule.name} in dynamic schema {name.value}")
                continue
            rules[raw.rule.name] = raw.rule
            b.rules.append(raw)
        b.add("dynamic", name, DynamicSchema(name.value, rules, span=self._span_from(kw)))

    def _rule(self, schema: str) -> _RawRule:
        kw = self._keyword("rule")
        name = self._ident("rule name")
        self._punct(":")
        action = self._ident("action name")
        self._punct("(")
        params: List[Tuple[Token, Token]] = []
        if not self._check(TT.PUNCT, ")"):
            while True:
                var = self._ident("participant variable")
                self._punct(":")
                tpl = self._ident("template name")
                params.append((var, tpl))
                if not self._match(TT.PUNCT, ","):
                    break
        self._punct(")")
        self._punct("{")
        sections: Dict[str, object] = {}
        while not self._match(TT.PUNCT, "}"):
            label = self._peek()
            if label.type != TT.IDENT or label.value not in ("pre", "effects", "post"):
                raise _SyntaxError(label.span, f"expected pre, effects or post, got {_describe(label)}")
            if label.value in sections:
                raise _SyntaxError(label.span, f"duplicate {label.value} section in rule {name.value}")
            self._advance()
            if label.value == "effects":
                sections["effects"] = self._effects()
            else:
                self._punct(":")
                sections[label.value] = self.expr()
                self._punct(";")
        rule = DynamicRule(
            name=name.value,
            action=action.value,
            participants=tuple((v.value, t.value) for v, t in params),
            pre=sections.get("pre", Lit(True)),  # type: ignore[arg-type]
            effects=tuple(sections.get("effects", ())),  # type: ignore[arg-type]
            post=sections.get("post", Lit(True)),  # type: ignore[arg-type]
            span=self._span_from(kw),
        )
        return _RawRule(rule, schema, action, params)

    def _inits(self, owner: str) -> Dict[str, Expr]:
        inits: Dict[str, Expr] = {}
        if not self._match(TT.PUNCT, "{"):
            self._punct(";")
            return inits
        while not self._match(TT.PUNCT, "}"):
            attr = self._ident("attribute name")
            if attr.value in inits:
                raise _SyntaxError(attr.span, f"duplicate initialiser {attr.value} in {owner}")
            self._punct("=")
            inits[attr.value] = self.expr()
            self._punct(";")
        self._match(TT.PUNCT, ";")
        return inits

    def _effects(self) -> list:
        self._punct("{")
        effects = []
        while not self._match(TT.PUNCT, "}"):
            tok = self._peek()
            if tok.is_(TT.KEYWORD, "create"):
                self._advance()
                var = self._ident("variable")
                self._punct(":")
                tpl = self._ident("template name")
                inits = self._inits(f"create {var.value}")
                effects.append(Create(var.value, tpl.value, inits, span=self._span_from(tok)))
            elif tok.is_(TT.KEYWORD, "delete"):
                self._advance()
                var = self._ident("variable")
                self._punct(";")
                effects.append(Delete(var.value, span=self._span_from(tok)))
            elif tok.is_(TT.KEYWORD, "reclassify"):
                self._advance()
                var = self._ident("variable")
                self._keyword("as")
                tpl = self._ident("template name")
                inits = self._inits(f"reclassify {var.value}")
                effects.append(Reclassify(var.value, tpl.value, inits, span=self._span_from(tok)))
            elif tok.is_(TT.KEYWORD, "link") or tok.is_(TT.KEYWORD, "unlink"):
                self._advance()
                role = self._ident("role name")
                self._punct("(")
                src = self._ident("variable")
                self._punct("->")
                tgt = self._ident("variable")
                self._punct(")")
                self._punct(";")
                cls = AddLink if tok.value == "link" else RemoveLink
                effects.append(cls(role.value, src.value, tgt.value, span=self._span_from(tok)))
            elif tok.type == TT.IDENT:
                var = self._advance()
                self._punct(".")
                attr = self._ident("attribute name")
                self._punct(":=")
                e = self.expr()
                self._punct(";")
                effects.append(Assign(var.value, attr.value, e, span=self._span_from(var)))
            else:
                raise _SyntaxError(tok.span, f"expected an effect, got {_describe(tok)}")
        return effects

    # -- systems ------------------------------------------------------------

    def parse_system(self) -> Optional[System]:
        try:
            start = self._keyword("system")
            name = self._ident("system name")
            self._keyword("conforms")
            model = self._ident("model name")
            self._punct("{")
        except _SyntaxError as err:
            self._error(err)
            return None
        b = _SystemBuilder(self, name.value, model.value)
        while not self._check(TT.PUNCT, "}") and not self._check(TT.EOF):
            begin = self.pos
            try:
                self._system_item(b)
            except _SyntaxError as err:
                self._error(err)
                self._recover(begin, SYSTEM_ITEMS)
        closed = self._close(start, f"system {name.value}")
        system = b.build(self._span_from(start))
        return system if closed else None

    def _system_item(self, b: "_SystemBuilder") -> None:
        tok = self._peek()
        if tok.is_(TT.KEYWORD, "object"):
            self._advance()
            oid = self._ident("object id")
            self._punct(":")
            templates = [self._ident("template name")]
            while self._match(TT.PUNCT, ","):
                templates.append(self._ident("template name"))
            state = None
            if not self._match(TT.PUNCT, ";"):
                state = self._state_block(f"object {oid.value}")
                self._match(TT.PUNCT, ";")
            obj = ObjectInstance(oid.value, frozenset(t.value for t in templates), state, span=self._span_from(tok))
            b.add_object(oid, obj)
        elif tok.is_(TT.KEYWORD, "link"):
            self._advance()
            lid = self._ident("link id")
            self._punct(":")
            role = self._ident("role name")
            self._punct("(")
            src = self._ident("object id")
            self._punct("->")
            tgt = self._ident("object id")
            self._punct(")")
            self._punct(";")
            b.add_link(lid, Link(lid.value, role.value, src.value, tgt.value, span=self._span_from(tok)), src, tgt)
        elif tok.is_(TT.KEYWORD, "time"):
            self._advance()
            label = self._ident("time label")
            snapshot = None
            if not self._match(TT.PUNCT, ";"):
                self._punct("{")
                snapshot = {}
                while not self._match(TT.PUNCT, "}"):
                    oid = self._ident("object id")
                    if oid.value in snapshot:
                        raise _SyntaxError(oid.span, f"object {oid.value} appears twice at time {label.value}")
                    snapshot[oid.value] = self._state_block(f"{oid.value} at {label.value}")
                    b.snapshot_refs.append(oid)
                self._match(TT.PUNCT, ";")
            b.add_time(label, snapshot)
        elif tok.is_(TT.KEYWORD, "node"):
            self._node(b)
        elif tok.is_(TT.KEYWORD, "travel"):
            self._advance()
            entity = self._ident("object id")
            source, source_path = None, None
            if self._match(TT.IDENT, "from"):
                source = self._ident("node name").value
                if self._match(TT.PUNCT, "."):
                    capsule = self._ident("capsule name").value
                    self._punct(".")
                    source_path = ContainmentPath(source, capsule, self._ident("cluster name").value)
            self._word("to")
            dest = self._ident("node name")
            self._punct(";")
            b.travel.append(
                TravelRequest(entity.value, source, dest.value, source_path=source_path, span=self._span_from(tok))
            )
        else:
            raise _SyntaxError(tok.span, f"expected a system item ({', '.join(SYSTEM_ITEMS)}), got {_describe(tok)}")

    def _node(self, b: "_SystemBuilder") -> None:
        self._advance()
        name = self._ident("node name")
        accepts: List[str] = []
        if self._match(TT.IDENT, "accepts"):
            accepts.append(self._expect(TT.STRING, what="credential string").value)
            while self._match(TT.PUNCT, ","):
                accepts.append(self._expect(TT.STRING, what="credential string").value)
        self._punct("{")
        capsules: Dict[str, Capsule] = {}
        while not self._match(TT.PUNCT, "}"):
            self._keyword("capsule")
            cname = self._ident("capsule name")
            if cname.value in capsules:
                raise _SyntaxError(cname.span, f"duplicate capsule {cname.value} in node {name.value}")
            self._punct("{")
            clusters: Dict[str, Cluster] = {}
            while not self._match(TT.PUNCT, "}"):
                self._keyword("cluster")
                kname = self._ident("cluster name")
                if kname.value in clusters:
                    raise _SyntaxError(kname.span, f"duplicate cluster {kname.value} in capsule {cname.value}")
                self._punct("{")
                members = self._id_list()
                self._punct("}")
                clusters[kname.value] = Cluster(kname.value, frozenset(t.value for t in members))
            capsules[cname.value] = Capsule(cname.value, clusters)
        if name.value in b.nodes:
            raise _SyntaxError(name.span, f"duplicate node {name.value}")
        b.nodes[name.value] = Node(name.value, frozenset(accepts), capsules)

    # -- traces -------------------------------------------------------------

    def parse_trace(self) -> Optional[Trace]:
        try:
            start = self._keyword("trace")
            name = self._ident("trace name")
            self._word("of")
            model = self._ident("model name")
            seed = None
            if self._match(TT.IDENT, "seed"):
                seed = self._int()
            declared: Optional[Tuple[Token, int]] = None
            if self._check(TT.IDENT, "steps"):
                tok = self._advance()
                declared = (tok, self._int())
            self._punct("{")
        except _SyntaxError as err:
            self._error(err)
            return None
        snapshots: List[System] = []
        steps: List[Step] = []
        try:
            while True:
                s = self.parse_system()
                if s is None:
                    return None
                if s.model_ref != model.value:
                    self.report.error(s.span, f"snapshot {s.name} conforms to {s.model_ref}, trace is of {model.value}")
                snapshots.append(s)
                if not self._check(TT.KEYWORD, "step"):
                    break
                steps.append(self._step())
            self._punct("}")
        except _SyntaxError as err:
            self._error(err)
            return None
        self._expect_eof()
        if declared is not None and declared[1] != len(steps):
            self.report.error(declared[0].span, f"trace declares {declared[1]} steps but records {len(steps)}")
        return Trace(name.value, model.value, tuple(snapshots), tuple(steps), seed, span=self._span_from(start))

    def _step(self) -> Step:
        kw = self._advance()
        rule = self._ident("rule name")
        self._punct("(")
        binding: Dict[str, str] = {}
        if not self._check(TT.PUNCT, ")"):
            while True:
                var = self._ident("variable")
                self._punct("=")
                obj = self._ident("object id")
                if var.value in binding:
                    raise _SyntaxError(var.span, f"variable {var.value} bound twice")
                binding[var.value] = obj.value
                if not self._match(TT.PUNCT, ","):
                    break
        self._punct(")")
        kind_tok = self._ident("internal or interaction")
        try:
            kind = ActionKind(kind_tok.value)
        except ValueError:
            raise _SyntaxError(kind_tok.span, f"unknown action kind {kind_tok.value}") from None
        conditions: List[ConditionBinding] = []
        if not self._match(TT.PUNCT, ";"):
            self._punct("{")
            while not self._match(TT.PUNCT, "}"):
                ctok = self._ident("pre or post")
                ref = self._ident("rule name")
                obj = self._ident("object id")
                state = self._ident("start or end")
                try:
                    binding_ = ConditionBinding(
                        ConditionKind(ctok.value), ref.value, obj.value, BoundState(state.value),
                        span=self._span_from(ctok),
                    )
                except ValueError:
                    raise _SyntaxError(self._span_from(ctok), "expected pre|post RULE OBJECT start|end") from None
                self._punct(";")
                conditions.append(binding_)
        return Step(rule.value, binding, kind, tuple(conditions), span=self._span_from(kw))


# ---- semantic passes --------------------------------------------------------


class _ModelBuilder:
    CATEGORIES = {
        "template": "templates",
        "action": "action_templates",
        "type": "types",
        "role": "roles",
        "invariant": "constrainer",
        "static": "describer",
        "dynamic": "specifier",
    }

    def __init__(self, parser: _Parser, name: str):
        self.p = parser
        self.report = parser.report
        self.name = name
        self.decls: Dict[str, Dict[str, object]] = {c: {} for c in self.CATEGORIES}
        self.template_refs: List[Token] = []
        self.inverse_refs: List[Tuple[str, Token]] = []
        self.rules: List[_RawRule] = []

    def add(self, category: str, name: Token, value: object) -> None:
        bucket = self.decls[category]
        if name.value in bucket:
            self.report.error(name.span, f"duplicate {category} {name.value}")
            return
        bucket[name.value] = value

    def build(self, span: SourceSpan) -> Model:
        templates = self.decls["template"]
        roles = self.decls["role"]
        for ref in self.template_refs:
            if ref.value not in templates:
                self.report.error(ref.span, f"unresolved template {ref.value}")
        for owner, ref in self.inverse_refs:
            other = roles.get(ref.value)
            if other is None:
                self.report.error(ref.span, f"unknown inverse role {ref.value} of role {owner}")
            elif other.inverse != owner:  # type: ignore[attr-defined]
                self.report.error(ref.span, f"role {owner} names {ref.value} as inverse, but not vice versa")
        for name, t in sorted(self.decls["type"].items()):
            if name in templates:
                self.report.error(t.span, f"ambiguous domain {name}: declared as template and type")  # type: ignore[attr-defined]
        seen_rules: Dict[str, str] = {}
        for raw in self.rules:
            if raw.rule.name in seen_rules and seen_rules[raw.rule.name] != raw.schema:
                self.report.error(raw.rule.span, f"rule {raw.rule.name} is declared in schemas {seen_rules[raw.rule.name]} and {raw.schema}")
            seen_rules.setdefault(raw.rule.name, raw.schema)

        draft = Model(self.name, span=span, **{attr: dict(self.decls[c]) for c, attr in self.CATEGORIES.items()})
        model = self._resolved(draft)
        self._typecheck(model)
        return model

    # member resolution -------------------------------------------------------

    def _resolver(self, m: Model, fallback: Optional[SourceSpan]) -> Callable[[Expr], Expr]:
        def report(e: Expr, message: str) -> None:
            self.report.error(e.span or fallback, message)  # type: ignore[arg-type]

        return lambda e: resolve_members(e, m.roles, m.domains, report)

    def _resolved(self, m: Model) -> Model:
        types = {n: replace(t, predicate=self._resolver(m, t.span)(t.predicate)) for n, t in m.types.items()}
        constrainer = {n: replace(s, predicate=self._resolver(m, s.span)(s.predicate)) for n, s in m.constrainer.items()}
        describer = {n: replace(s, predicate=self._resolver(m, s.span)(s.predicate)) for n, s in m.describer.items()}
        specifier = {}
        for n, d in m.specifier.items():
            specifier[n] = replace(d, rules={rn: self._resolved_rule(m, r) for rn, r in d.rules.items()})
        return replace(m, types=types, constrainer=constrainer, describer=describer, specifier=specifier)

    def _resolved_rule(self, m: Model, r: DynamicRule) -> DynamicRule:
        go = self._resolver(m, r.span)
        effects = []
        for eff in r.effects:
            if isinstance(eff, Assign):
                eff = replace(eff, expr=go(eff.expr))
            elif isinstance(eff, (Create, Reclassify)):
                eff = replace(eff, inits={k: go(v) for k, v in eff.inits.items()})
            effects.append(eff)
        return replace(r, pre=go(r.pre), post=go(r.post), effects=tuple(effects))

    # sort checking -------------------------------------------------------------

    def _type_errors(self, p: Expr, m: Model, env: Mapping[str, PSort], fallback: Optional[SourceSpan],
                     want: Optional[PSort] = None) -> PSort:
        sort, errors = typecheck_expr(p, m, env)
        for err in errors:
            self.report.error(err.span or fallback, f"type error: {err.message}")  # type: ignore[arg-type]
        if want is not None and sort.kind not in (Kind.ANY, want.kind):
            self.report.error(p.span or fallback, f"type error: {sort} used as {want}")  # type: ignore[arg-type]
        return sort

    def _typecheck(self, m: Model) -> None:
        for t in m.types.values():
            self._type_errors(t.predicate, m, {"self": ANY_OBJECT}, t.span, BOOL)
        for s in list(m.constrainer.values()) + list(m.describer.values()):
            self._type_errors(s.predicate, m, {}, s.span, BOOL)
        raw_by_name = {raw.rule.name: raw for raw in self.rules}
        for d in m.specifier.values():
            for r in d.rules.values():
                self._check_rule(m, r, raw_by_name.get(r.name))

    def _check_rule(self, m: Model, r: DynamicRule, raw: Optional[_RawRule]) -> None:
        span = r.span
        action = m.action_templates.get(r.action)
        if action is None:
            self.report.error(raw.action_tok.span if raw else span, f"unresolved action {r.action}")  # type: ignore[arg-type]
        elif len(action.participants) != len(r.participants):
            self.report.error(
                span,  # type: ignore[arg-type]
                f"rule {r.name} binds {len(r.participants)} participants but action {action.name} has {len(action.participants)}",
            )
        env: Dict[str, PSort] = {}
        for i, (var, tpl) in enumerate(r.participants):
            var_span = raw.param_toks[i][0].span if raw else span
            tpl_span = raw.param_toks[i][1].span if raw else span
            if var in env:
                self.report.error(var_span, f"participant variable {var} is declared twice")  # type: ignore[arg-type]
            if tpl not in m.templates:
                self.report.error(tpl_span, f"unresolved template {tpl}")  # type: ignore[arg-type]
            elif action is not None and i < len(action.participants):
                expected = action.participants[i]
                if expected not in self._closure(m, tpl):
                    self.report.error(tpl_span, f"participant {var}: {tpl} does not instantiate {expected} as action {action.name} requires")  # type: ignore[arg-type]
            env[var] = object_of(tpl)
        self._type_errors(r.pre, m, env, span, BOOL)
        for eff in r.effects:
            where = eff.span or span
            if isinstance(eff, Assign):
                if self._bound(eff.var, env, where):
                    attrs = m.attributes_of(self._closure(m, *(env[eff.var].templates or ())))
                    if eff.attr not in attrs:
                        self.report.error(where, f"attribute {eff.attr} is not declared for {eff.var}")  # type: ignore[arg-type]
                        self._type_errors(eff.expr, m, env, where)
                    else:
                        self._type_errors(eff.expr, m, env, where, sort_psort(attrs[eff.attr]))
            elif isinstance(eff, (Create, Reclassify)):
                if isinstance(eff, Create) and eff.var in env:
                    self.report.error(where, f"variable {eff.var} is already bound")  # type: ignore[arg-type]
                if isinstance(eff, Reclassify):
                    self._bound(eff.var, env, where)
                if eff.template not in m.templates:
                    self.report.error(where, f"unresolved template {eff.template}")  # type: ignore[arg-type]
                    continue
                attrs = m.attributes_of(self._closure(m, eff.template))
                for attr, e in eff.inits.items():
                    if attr not in attrs:
                        self.report.error(e.span or where, f"attribute {attr} is not declared by {eff.template}")  # type: ignore[arg-type]
                    else:
                        self._type_errors(e, m, env, where, sort_psort(attrs[attr]))
                missing = sorted(set(attrs) - set(eff.inits))
                if isinstance(eff, Create) and missing:
                    self.report.error(where, f"create {eff.var} : {eff.template} does not initialise {', '.join(missing)}")  # type: ignore[arg-type]
                env[eff.var] = object_of(eff.template)
            elif isinstance(eff, Delete):
                if self._bound(eff.var, env, where):
                    del env[eff.var]
            else:
                if eff.role not in m.roles:
                    self.report.error(where, f"unknown role {eff.role}")  # type: ignore[arg-type]
                self._bound(eff.source, env, where)
                self._bound(eff.target, env, where)
        self._type_errors(r.post, m, env, span, BOOL)
        if not r.effects:
            self.report.warning(span, f"rule {r.name} has no effects; its start and end states coincide")  # type: ignore[arg-type]

    def _bound(self, var: str, env: Mapping[str, PSort], where: Optional[SourceSpan]) -> bool:
        if var not in env:
            self.report.error(where, f"effect touches unbound variable {var}")  # type: ignore[arg-type]
            return False
        return True

    @staticmethod
    def _closure(m: Model, *templates: str) -> frozenset:
        out: set = set()
        for t in templates:
            try:
                out |= m.closure(t)
            except OdpCheckError:
                out.add(t)
        return frozenset(out)


class _SystemBuilder:
    def __init__(self, parser: _Parser, name: str, model_ref: str):
        self.report = parser.report
        self.name = name
        self.model_ref = model_ref
        self.objects: Dict[str, ObjectInstance] = {}
        self.links: Dict[str, Link] = {}
        self.link_refs: List[Token] = []
        self.time_points: List[str] = []
        self.snapshots: Dict[str, Dict[str, Dict[str, Value]]] = {}
        self.snapshot_refs: List[Token] = []
        self.nodes: Dict[str, Node] = {}
        self.travel: List[TravelRequest] = []

    def add_object(self, tok: Token, obj: ObjectInstance) -> None:
        if tok.value in self.objects:
            self.report.error(tok.span, f"duplicate object {tok.value}")
            return
        self.objects[tok.value] = obj

    def add_link(self, tok: Token, link: Link, src: Token, tgt: Token) -> None:
        if tok.value in self.links:
            self.report.error(tok.span, f"duplicate link {tok.value}")
            return
        self.links[tok.value] = link
        self.link_refs.extend([src, tgt])

    def add_time(self, tok: Token, snapshot: Optional[Dict[str, Dict[str, Value]]]) -> None:
        if tok.value in self.time_points:
            self.report.error(tok.span, f"duplicate time point {tok.value}")
            return
        self.time_points.append(tok.value)
        if snapshot is not None:
            self.snapshots[tok.value] = snapshot

    def build(self, span: SourceSpan) -> System:
        for ref in self.link_refs + self.snapshot_refs:
            if ref.value not in self.objects:
                self.report.error(ref.span, f"unknown object {ref.value}")
        return System(
            name=self.name,
            model_ref=self.model_ref,
            objects=self.objects,
            links=self.links,
            time_points=tuple(self.time_points),
            explicit_snapshots=self.snapshots,
            containment=Containment(self.nodes),
            travel_log=tuple(self.travel),
            span=span,
        )


# ---- public API -------------------------------------------------------------


def read_model(text: str, file: str = "<input>") -> ParseResult[Model]:
    p = _Parser(text, file)
    return ParseResult(p.parse_model(), p.report)


def read_system(text: str, file: str = "<input>") -> ParseResult[System]:
    p = _Parser(text, file)
    s = p.parse_system()
    if s is not None:
        p._expect_eof()
    return ParseResult(s, p.report)


def read_trace(text: str, file: str = "<input>") -> ParseResult[Trace]:
    p = _Parser(text, file)
    return ParseResult(p.parse_trace(), p.report)


def parse_model(text: str, file: str = "<input>") -> Union[Model, ParseReport]:
    return read_model(text, file).unwrap()


def parse_system(text: str, file: str = "<input>") -> Union[System, ParseReport]:
    return read_system(text, file).unwrap()


def parse_trace(text: str, file: str = "<input>") -> Union[Trace, ParseReport]:
    return read_trace(text, file).unwrap()


def parse_predicate(
    text: str,
    model: Optional[Model] = None,
    file: str = "<predicate>",
) -> Union[Expr, ParseReport]:
    """Parse a standalone predicate, resolving members against ``model`` when given."""
    p = _Parser(text, file)
    try:
        e = p.expr()
        p._expect_eof()
    except _SyntaxError as err:
        p._error(err)
        return p.report
    if model is not None:
        e = resolve_members(e, model.roles, model.domains, lambda n, msg: p.report.error(n.span or SourceSpan(file, 1, 1, 1, 1), msg))
    else:
        e = resolve_members(e, frozenset(), {}, lambda n, msg: None)
    return p.report if p.report.failed else e


def read_any(text: str, file: str = "<input>") -> ParseResult:
    """Dispatch on the first keyword of the file."""
    probe = ParseReport()
    tokens = tokenize(text, file, probe)
    head = tokens[0].value if tokens else ""
    if head == "system":
        return read_system(text, file)
    if head == "trace":
        return read_trace(text, file)
    return read_model(text, file)


__all__ = [
    "ParseResult",
    "parse_model",
    "parse_predicate",
    "parse_system",
    "parse_trace",
    "read_any",
    "read_model",
    "read_system",
    "read_trace",
]
