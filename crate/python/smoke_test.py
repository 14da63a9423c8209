"""Smoke test for the pyhypmix extension.

Build and install first:

    cd crates/python && maturin build --release -o dist && pip install dist/*.whl
"""

import sys

import pyhypmix as hm


def main():
    assert hm.reduce("abBA") == "1"
    assert hm.multiply("ab", "Ba") == "aa"
    assert hm.inverse("abc", rank=3) == "CBA"

    h = hm.Subgroup(["a", "b"])
    assert h.index() == 1 and h.rank() == 2
    k = hm.Subgroup(["aa", "ab", "bb"])
    assert k.index() == 2 and k.rank() == 3
    a = hm.Subgroup(["a"])
    assert a.contains("aaa") and not a.contains("b")
    assert a.index() is None
    assert hm.Subgroup.from_text(k.to_text()) == k
    assert a.conjugate("b").conjugate("B") == a
    assert a.is_transverse("ab")
    assert a.power_conjugate_into("bab") is None
    m, v = a.power_conjugate_into("baaB")
    assert m == 1 and a.contains(hm.multiply(hm.multiply(hm.inverse(v), "baaB"), v))
    f, n, aux = hm.construct_transverse([a, hm.Subgroup(["b"])], "ab")
    assert a.is_transverse(f) and hm.Subgroup(["b"]).is_transverse(f)

    d = hm.drift(2, 1000, 200, seed=1)
    assert abs(d["estimate"] - 0.5) < 0.05, d

    rows = hm.mixing(["a"], ["b"], [10, 160], 200, seed=1)
    assert rows[0]["p_hat"] <= rows[1]["p_hat"] + 0.1
    assert rows[1]["p_hat"] >= 0.9, rows

    assert hm.xi("x", "y", "xy") == "yX"
    assert hm.claim2("ZZ") == "1"
    print("claim1(xzy) =", hm.claim1("xzy"))
    print("claim3 =", hm.claim3([("xz", "zy")], 2))

    q = hm.estimate_qn(50, 2000, p_letter="1/8", seed=1)
    assert q["p_hat"] <= 0.35, q

    results = hm.selftest([2, 7])
    for _, _, line in results:
        print(line)
    assert all(passed for _, passed, _ in results)

    print("smoke test ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
