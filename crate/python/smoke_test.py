"""Smoke test for the chiral_py bindings.

Build and install first:  pip install --no-build-isolation ./crates/chiral-py
"""

import chiral_py as ch

FLAT_PAIR = """
[patch]
n = 2

[twist]
F_A = ":c[1] c[2]:"
F_Ahat = "2*:c[1] c[2]:"
H3 = "0"

[run]
suites = ["tduality-proof", "t-ch"]
samples = 3
"""


def main():
    p = ch.Patch(2)
    b, c = p.field("b[1]"), p.field("c[1]")
    assert [str(e) for e in b.bracket(c)] == ["(1)"], b.bracket(c)
    assert p.evaluate("[b[1] lam c[1]]") == "lam^(0): (1)"
    assert (b * c).weight() == 1

    fields = dict(p.structure_fields())
    assert p.d(fields["G"]) == fields["L"]
    jj = fields["J"].bracket(fields["J"])
    assert str(jj[1]) == "(2)", [str(e) for e in jj]

    try:
        p.field("b[1] +")
    except ValueError as e:
        assert "column" in str(e)
    else:
        raise AssertionError("syntax error not reported")

    pair = ch.DualPair.from_config(FLAT_PAIR)
    one = pair.field("1")
    assert pair.t_ch(one) == pair.field("Ahat", dual=True)
    assert pair.t_ch(pair.field("A")) == -pair.field("1", dual=True)

    text, ok = ch.run_suites(FLAT_PAIR, "tduality")
    assert ok, text

    computed, predicted = ch.point_character(4)
    assert computed == predicted
    assert ch.courant_failures(2, 5) == [0, 0, 0, 0, 0]
    print("chiral_py smoke test ok")


if __name__ == "__main__":
    main()
