import json

import pytest

from freecert.cli import main
from freecert.tree import FiniteGroup

MATRIX_HEADER = """format 1
place arch

[matrix-group]
dim 2
gen a = [[81, 0], [0, 1]]
gen b = [[41, 40], [40, 41]]
"""

SANOV_HEADER = """format 1
place arch

[matrix-group]
dim 2
gen a = [[1, 2], [0, 1]]
gen b = [[1, 0], [2, 1]]
"""


def mod_amalgam_header() -> str:
    return """format 1

[amalgam]
names-a e s
table-a
0 1
1 0
names-b e t u
table-b
0 1 2
1 2 0
2 0 1
names-h e
table-h
0
embed-a 0
embed-b 0
"""


def s3_amalgam_header(h: str) -> str:
    s3 = FiniteGroup.from_permutations([(0, 2, 1), (1, 2, 0)])
    rows = "\n".join(" ".join(str(x) for x in r) for r in s3.table)
    if h == "a3":
        h_block = "names-h e p q\ntable-h\n0 1 2\n1 2 0\n2 0 1\nembed-a 0 3 4\nembed-b 0 3 4"
    else:
        h_block = "names-h e p\ntable-h\n0 1\n1 0\nembed-a 0 1\nembed-b 0 1"
    return f"""format 1

[amalgam]
names-a e t1 t2 c1 c2 t3
table-a
{rows}
names-b f u1 u2 d1 d2 u3
table-b
{rows}
{h_block}
"""


def run(tmp_path, command, text, *extra):
    prob = tmp_path / "in.prob"
    prob.write_text(text)
    out = tmp_path / "out.cert"
    code = main([command, str(prob), "--out", str(out)] + list(extra))
    data = json.loads(out.read_text()) if out.exists() and out.read_text() else None
    return code, data, out


def verify_file(path) -> int:
    return main(["verify", str(path)])


def test_analyze_contracting_yes(tmp_path):
    text = MATRIX_HEADER + "\n[task]\nop analyze\nsubop contracting\nelement a\nepsilon-sq 1/4\n"
    code, cert, out = run(tmp_path, "analyze", text)
    assert code == 0
    assert cert["verdict"] == "yes"
    assert verify_file(out) == 0


def test_analyze_identity_no(tmp_path):
    text = (
        "format 1\nplace arch\n[matrix-group]\ngen e = [[1, 0], [0, 1]]\n"
        "[task]\nop analyze\nsubop contracting\nelement e\nepsilon-sq 1/4\n"
    )
    code, cert, out = run(tmp_path, "analyze", text)
    assert code == 3
    assert cert["verdict"] == "no"
    assert verify_file(out) == 0


def test_analyze_profile_padic(tmp_path):
    text = (
        "format 1\nplace p:5\n[matrix-group]\ngen g = [[5, 0], [0, 1]]\n"
        "[task]\nop analyze\nsubop profile\nelement g\n"
    )
    code, cert, out = run(tmp_path, "analyze", text)
    assert code == 0
    assert cert["result"]["exact"] is True
    assert cert["result"]["values_sq"] == [{"lo": "1", "hi": "1"}, {"lo": "1/25", "hi": "1/25"}]


def test_analyze_power_proximal(tmp_path):
    text = (
        "format 1\nplace arch\n[matrix-group]\ngen g = [[2, 0], [0, 1]]\n"
        "[task]\nop analyze\nsubop power-proximal\nelement g\nr-sq 1/4\nepsilon-sq 1/64\nmax-n 20\n"
    )
    code, cert, out = run(tmp_path, "analyze", text)
    assert code == 0
    assert cert["result"]["n"] == 6
    assert verify_file(out) == 0


def test_analyze_malformed_rational(tmp_path):
    text = "format 1\nplace arch\n[matrix-group]\ngen g = [[1/0, 0], [0, 1]]\n[task]\nop analyze\nsubop profile\nelement g\n"
    code, cert, _ = run(tmp_path, "analyze", text)
    assert code == 2 and cert is None


def test_pingpong_certified_and_verify(tmp_path):
    text = MATRIX_HEADER + "\n[task]\nop pingpong\nsubop tuple\nplayer g1 = a\nplayer g2 = b\nradius-sq 1/10\n"
    code, cert, out = run(tmp_path, "pingpong", text)
    assert code == 0
    assert cert["verdict"] == "certified"
    assert cert["result"]["oracle"] == "no-relation"
    assert verify_file(out) == 0


def test_pingpong_duplicates_refuted(tmp_path):
    text = MATRIX_HEADER + "\n[task]\nop pingpong\nplayer g1 = a\nplayer g2 = a\nradius-sq 1/10\n"
    code, cert, _ = run(tmp_path, "pingpong", text)
    assert code == 3
    assert cert["verdict"] == "refuted"
    assert "witness" in cert["result"]


def test_pingpong_oracle_sanov(tmp_path):
    text = SANOV_HEADER + "\n[task]\nop pingpong\nsubop oracle\nplayer a = a\nplayer b = b\noracle-len 6\n"
    code, cert, _ = run(tmp_path, "pingpong", text)
    assert code == 0
    assert cert["result"]["oracle"] == "no-relation"


def test_pingpong_mixed_backends(tmp_path):
    text = MATRIX_HEADER + mod_amalgam_header().split("format 1")[1] + "\n[task]\nop pingpong\nplayer g = a\n"
    code, _, _ = run(tmp_path, "pingpong", text)
    assert code == 2


def test_tree_classify(tmp_path):
    text = mod_amalgam_header() + "\n[task]\nop tree\nsubop classify\nword s t\n"
    code, cert, out = run(tmp_path, "tree", text)
    assert code == 0
    assert cert["result"]["kind"] == "hyperbolic"
    assert cert["result"]["translation_length"] == 2
    assert verify_file(out) == 0


def test_tree_classify_elliptic(tmp_path):
    text = mod_amalgam_header() + "\n[task]\nop tree\nsubop classify\nword s\n"
    code, cert, _ = run(tmp_path, "tree", text)
    assert code == 0
    assert cert["result"]["kind"] == "elliptic"


def test_tree_normal_form(tmp_path):
    text = mod_amalgam_header() + "\n[task]\nop tree\nsubop normal-form\nword s s\n"
    code, cert, out = run(tmp_path, "tree", text)
    assert code == 0
    assert cert["result"]["is_identity"] is True
    assert verify_file(out) == 0


def test_tree_expand(tmp_path):
    text = mod_amalgam_header() + "\n[task]\nop tree\nsubop expand\nradius 2\n"
    code, cert, out = run(tmp_path, "tree", text)
    assert code == 0
    assert cert["result"]["count"] == 1 + 2 + 2 * 2
    assert verify_file(out) == 0


def test_tree_pingpong_via_cli(tmp_path):
    text = mod_amalgam_header() + "\n[task]\nop tree\nsubop pingpong\nword s t s t\nword t s t s\n"
    code, cert, out = run(tmp_path, "tree", text)
    assert code == 0
    assert cert["verdict"] == "certified"
    assert cert["result"]["oracle"] == "no-relation"
    assert verify_file(out) == 0


def test_tree_kernel_fixtures(tmp_path):
    code, cert, out = run(tmp_path, "tree", s3_amalgam_header("a3") + "\n[task]\nop tree\nsubop kernel\n")
    assert code == 0
    assert cert["result"]["elements"] == [0, 1, 2]
    assert verify_file(out) == 0
    code, cert, _ = run(tmp_path, "tree", s3_amalgam_header("c2") + "\n[task]\nop tree\nsubop kernel\n")
    assert code == 0
    assert cert["result"]["elements"] == [0]


def test_tree_bad_table(tmp_path):
    text = mod_amalgam_header().replace("0 1\n1 0", "0 1\n1 1") + "\n[task]\nop tree\nsubop kernel\n"
    code, _, _ = run(tmp_path, "tree", text)
    assert code == 2


def test_synthesize_prodense(tmp_path):
    text = SANOV_HEADER + "\n[task]\nop synthesize\nsubop truncated-prodense\nnormal N = a a\ncosets N = a | b\n"
    code, cert, out = run(tmp_path, "synthesize", text)
    assert code == 0
    assert cert["verdict"] == "certified"
    assert cert["result"]["combined"] == "certified"
    assert cert["result"]["oracle"] == "no-relation"
    assert len(cert["result"]["step2"]["N"]) == 2
    assert verify_file(out) == 0


def test_synthesize_prodense_empty_normals(tmp_path):
    text = SANOV_HEADER + "\n[task]\nop synthesize\nsubop truncated-prodense\n"
    code, _, _ = run(tmp_path, "synthesize", text)
    assert code == 2


def test_synthesize_prodense_zero_budgets(tmp_path):
    text = SANOV_HEADER + "\n[task]\nop synthesize\nsubop truncated-prodense\nnormal N = a a\ncosets N = a\n"
    code, cert, _ = run(tmp_path, "synthesize", text, "--budget", "host_word_len=0")
    assert code == 4
    assert cert["verdict"] == "unknown"


def test_synthesize_conjugate_contract(tmp_path):
    text = (
        "format 1\nplace arch\n[matrix-group]\ngen g = [[9, 0], [0, 1]]\ngen r = [[0, -1], [1, 0]]\n"
        "[task]\nop synthesize\nsubop conjugate-contract\nelement g\nx-element r\nepsilon-sq 1/100\nm-max 6\n"
    )
    code, cert, out = run(tmp_path, "synthesize", text)
    assert code == 0
    assert 1 <= cert["result"]["m"] <= 6
    assert verify_file(out) == 0


def test_synthesize_b1b2b3(tmp_path):
    text = (
        "format 1\nplace arch\n[matrix-group]\n"
        "gen g = [[25, 0], [0, 1]]\ngen r = [[0, -1], [1, 0]]\ngen s = [[1, -1], [1, 1]]\n"
        "[task]\nop synthesize\nsubop b1b2b3\nelement g\nb1 r\nb2 r\nb3 s\n"
        "attract ball [1, 0] 1/25\nrepel ball [0, 1] 1/25\nk-max 32\n"
    )
    code, cert, out = run(tmp_path, "synthesize", text)
    assert code == 0
    assert cert["result"]["k"] <= 32
    assert verify_file(out) == 0


def test_synthesize_very_proximal(tmp_path):
    text = (
        "format 1\nplace arch\n[matrix-group]\ngen g = [[25, 0], [0, 1]]\ngen s = [[1, -1], [1, 1]]\n"
        "[task]\nop synthesize\nsubop very-proximal\nelement g\nword-len 2\nr-sq 1/4\nepsilon-sq 1/25\n"
    )
    code, cert, out = run(tmp_path, "synthesize", text)
    assert code == 0
    assert verify_file(out) == 0


def test_synthesize_normal_proximal_and_cosets(tmp_path):
    text = SANOV_HEADER + "\n[task]\nop synthesize\nsubop normal-proximal\nnormal N = a a\n"
    code, cert, out = run(tmp_path, "synthesize", text)
    assert code == 0
    assert verify_file(out) == 0
    text = SANOV_HEADER + "\n[task]\nop synthesize\nsubop coset-pingpong\nnormal N = a a\ncosets N = a | b\n"
    code, cert, out = run(tmp_path, "synthesize", text)
    assert code == 0
    assert len(cert["result"]["deltas"]) == 2
    assert verify_file(out) == 0


def test_synthesize_double_coset(tmp_path):
    text = (
        "format 1\nplace arch\n[matrix-group]\n"
        "gen g = [[25, 0], [0, 1]]\ngen h = [[13, 12], [12, 13]]\ngen r = [[0, -1], [1, 0]]\n"
        "[task]\nop synthesize\nsubop double-coset\nh1 g\nh2 h\ncoset-rep r\n"
    )
    code, cert, out = run(tmp_path, "synthesize", text)
    assert code == 0
    assert cert["result"]["wrapped"][0]["m"] >= 1
    assert verify_file(out) == 0


def test_determinism_byte_identical(tmp_path):
    text = MATRIX_HEADER + "\n[task]\nop pingpong\nplayer g1 = a\nplayer g2 = b\nradius-sq 1/10\n"
    _, _, out1 = run(tmp_path, "pingpong", text)
    first = out1.read_text()
    _, _, out2 = run(tmp_path, "pingpong", text)
    assert out2.read_text() == first


def test_verify_rejects_mutations(tmp_path):
    text = MATRIX_HEADER + "\n[task]\nop pingpong\nplayer g1 = a\nplayer g2 = b\nradius-sq 1/10\n"
    code, cert, out = run(tmp_path, "pingpong", text)
    assert code == 0
    mutated = json.loads(out.read_text())
    for c in mutated["claims"]:
        if c["type"] == "set-disjoint":
            c["left"][0]["radius_sq"] = "99/100"
            break
    bad = tmp_path / "bad.cert"
    bad.write_text(json.dumps(mutated, sort_keys=True, indent=2) + "\n")
    assert verify_file(bad) == 3


def test_verify_rejects_truncation(tmp_path):
    text = MATRIX_HEADER + "\n[task]\nop analyze\nsubop profile\nelement a\n"
    _, _, out = run(tmp_path, "analyze", text)
    bad = tmp_path / "trunc.cert"
    bad.write_text(out.read_text()[:100])
    assert verify_file(bad) == 2


def test_place_override_flag(tmp_path):
    text = "format 1\nplace arch\n[matrix-group]\ngen g = [[5, 0], [0, 1]]\n[task]\nop analyze\nsubop profile\nelement g\n"
    code, cert, _ = run(tmp_path, "analyze", text, "--place", "p:5")
    assert code == 0
    assert cert["place"] == "p:5"
    assert cert["result"]["exact"] is True


def test_unknown_section_is_positioned_error(tmp_path, capsys):
    prob = tmp_path / "x.prob"
    prob.write_text("format 1\n[weird]\n")
    code = main(["analyze", str(prob)])
    assert code == 2
    err = capsys.readouterr().err
    assert "2:2" in err
