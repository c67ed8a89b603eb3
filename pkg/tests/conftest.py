import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lemmakit.terms import (
    Abs,
    App,
    Bound,
    Const,
    Free,
    Signature,
    SignatureEntry,
    TCon,
    TVar,
    fun,
)

OCTO = TCon("Octonions.octo")
BOOL = TCon("HOL.bool")
REAL = TCon("Real.real")
NAT = TCon("Nat.nat")


def octo_list(t):
    return TCon("List.list", (t,))


BINOP = fun(OCTO, fun(OCTO, OCTO))
EQ_OCTO = fun(OCTO, fun(OCTO, BOOL))


def plus(a, b):
    return App(App(Const("Octonions.octo_plus", BINOP), a), b)


def times(a, b):
    return App(App(Const("Octonions.octo_times", BINOP), a), b)


def eq(a, b):
    return App(App(Const("HOL.eq", EQ_OCTO), a), b)


@pytest.fixture(scope="session")
def octo_signature() -> Signature:
    return Signature(
        [
            SignatureEntry(
                "Octonions.octo_plus",
                BINOP,
                "octo_plus a b = Octo (Re a + Re b) ...",
            ),
            SignatureEntry(
                "Octonions.octo_times",
                BINOP,
                "octo_times a b = Octo (Re a * Re b - ...) ...",
            ),
        ]
    )


@pytest.fixture(scope="session")
def lemma_noncommutative():
    """not (ALL x y :: octo. x * y = y * x)"""
    all_ty = fun(fun(OCTO, BOOL), BOOL)
    inner_eq = App(
        App(
            Const("HOL.eq", EQ_OCTO),
            App(App(Const("Octonions.octo_times", BINOP), Bound(1)), Bound(0)),
        ),
        App(App(Const("Octonions.octo_times", BINOP), Bound(0)), Bound(1)),
    )
    quantified = App(
        Const("HOL.All", all_ty),
        Abs("x", OCTO, App(Const("HOL.All", all_ty), Abs("y", OCTO, inner_eq))),
    )
    return App(Const("HOL.Not", fun(BOOL, BOOL)), quantified)


@pytest.fixture(scope="session")
def lemma_distrib_left():
    """a * (b + c) = a * b + a * c"""
    a, b, c = Free("a", OCTO), Free("b", OCTO), Free("c", OCTO)
    return eq(times(a, plus(b, c)), plus(times(a, b), times(a, c)))


@pytest.fixture(scope="session")
def lemma_assoc_plus():
    """a + (b + c) = (a + b) + c"""
    a, b, c = Free("a", OCTO), Free("b", OCTO), Free("c", OCTO)
    return eq(plus(a, plus(b, c)), plus(plus(a, b), c))


@pytest.fixture(scope="session")
def candidate_symbols():
    """The candidate operator set used alongside the associativity template:
    +, -, ^ on reals; sin, cos on reals; len, rev, @ on lists."""
    a = TVar("'a")
    return [
        SignatureEntry("Groups.plus", fun(REAL, fun(REAL, REAL)), None),
        SignatureEntry("Groups.minus", fun(REAL, fun(REAL, REAL)), None),
        SignatureEntry("Transcendental.sin", fun(REAL, REAL), None),
        SignatureEntry("Transcendental.cos", fun(REAL, REAL), None),
        SignatureEntry("Power.power", fun(REAL, fun(REAL, REAL)), None),
        SignatureEntry("List.length", fun(octo_list(a), NAT), None),
        SignatureEntry("List.rev", fun(octo_list(a), octo_list(a)), None),
        SignatureEntry(
            "List.append", fun(octo_list(a), fun(octo_list(a), octo_list(a))), None
        ),
    ]
