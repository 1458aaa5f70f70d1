import json
import random

from amstack import dsl, fixtures


# ---------------------------------------------------------------------------
# tokenize


def test_tokenize_require_line():
    kinds = [t.kind for t in dsl.tokenize("require IR { frequency >= 50 Hz }")]
    assert kinds == ["kw_require", "ident", "lbrace", "ident", "geq", "number", "unit", "rbrace"]


def test_tokenize_empty():
    assert dsl.tokenize("") == []


def test_tokenize_bind_line():
    kinds = [t.kind for t in dsl.tokenize("node cmd = Control(plan)")]
    assert kinds == ["kw_node", "ident", "eq", "ident", "lparen", "ident", "rparen"]


def test_tokenize_digit_leading_identifier():
    toks = dsl.tokenize("2DPerception")
    assert [t.kind for t in toks] == ["ident"]
    assert toks[0].text == "2DPerception"


def test_tokenize_resolution_and_attached_unit():
    toks = dsl.tokenize("resolution = 320x240; latency<=0.001ms")
    kinds = [t.kind for t in toks]
    assert "resolution" in kinds
    res = next(t for t in toks if t.kind == "resolution")
    assert res.value == (320, 240)
    num = next(t for t in toks if t.kind == "number")
    assert num.value == 0.001
    assert any(t.kind == "unit" and t.value == "ms" for t in toks)


def test_tokenize_unknown_chars_become_error_tokens():
    toks = dsl.tokenize("require @ $")
    assert [t.kind for t in toks] == ["kw_require", "error", "error"]


def test_tokenize_comments_and_spans():
    toks = dsl.tokenize("# a comment\nnode x = F(a)\n")
    assert toks[0].kind == "kw_node"
    assert toks[0].span.line == 2 and toks[0].span.col == 1


# ---------------------------------------------------------------------------
# parse


def test_parse_robot_vacuum_program():
    text = fixtures.read("robot_vacuum.amg")
    ast, diags = dsl.parse_text(text)
    assert ast is not None and not dsl.has_errors(diags)
    assert len(ast.decls) == 7
    assert len(ast.bindings) == 3
    resolved, rdiags = dsl.resolve(ast)
    assert resolved is not None
    assert len(resolved.sources) == 4
    assert len(resolved.operators) == 3


def test_parse_camera_require():
    ast, diags = dsl.parse_text("require Camera { resolution = 320x240; frequency >= 30 Hz }")
    assert ast is not None, diags
    (decl,) = ast.decls
    assert decl.name == "Camera"
    assert decl.frequency == dsl.FreqSpec(">=", 30.0)
    assert decl.resolution == (320, 240)


def test_parse_unclosed_paren_single_diagnostic():
    ast, diags = dsl.parse_text("node x = F(")
    assert ast is None
    errors = [d for d in diags if d.severity == "error"]
    assert len(errors) == 1
    assert errors[0].code == "E-PAREN"


def test_parse_units_normalized():
    ast, _ = dsl.parse_text("require S { frequency >= 0.05 Hz; message_size = 2 MB }")
    (decl,) = ast.decls
    assert decl.message_size == 2_000_000
    ast, _ = dsl.parse_text("contract end_to_end { latency <= 0.5 s }")
    assert ast.contracts[0].latency_bound_ms == 500.0


def test_parse_beam_count_resolution():
    ast, _ = dsl.parse_text("require LiDAR { resolution = 64; frequency >= 10 Hz }")
    assert ast.decls[0].resolution == 64


def test_parse_contract_rejects_empty_and_unknown():
    ast, diags = dsl.parse_text("contract end_to_end { }")
    assert ast is None
    ast, diags = dsl.parse_text("contract end_to_end { wattage <= 5 W }")
    assert ast is None
    assert any(d.code == "E-ATTR" for d in diags)


def test_parse_rejects_nonpositive_bounds():
    ast, diags = dsl.parse_text("require S { frequency >= 0 Hz }")
    assert ast is None
    assert any(d.code == "E-ATTR" for d in diags)


def test_error_recovery_counts():
    # two malformed statements among five: three survive, two errors reported
    text = "\n".join(
        [
            "require Src { frequency >= 10 Hz }",
            "node x = Filt(",
            "require Filt { frequency >= 20 Hz }",
            "node y = = Filt(Src)",
            "node z = Filt(Src)",
        ]
    )
    ast, diags = dsl.parse_lenient(dsl.tokenize(text))
    survived = len(ast.decls) + len(ast.bindings) + len(ast.maps) + len(ast.contracts)
    assert survived == 3
    assert sum(1 for d in diags if d.severity == "error") >= 2


def test_diagnostic_spans_inside_input():
    text = "require A { frequency >= 10 Hz }\nnode x = F(\n"
    lines = text.splitlines()
    _, diags = dsl.parse_lenient(dsl.tokenize(text))
    for d in diags:
        assert d.span is not None
        assert 1 <= d.span.line <= len(lines)
        assert 1 <= d.span.col <= len(lines[d.span.line - 1]) + 2


def test_parse_determinism():
    text = fixtures.read("av.amg")
    a1 = dsl.parse_text(text)
    a2 = dsl.parse_text(text)
    assert a1 == a2
    assert dsl.diagnostics_to_json(list(a1[1])) == dsl.diagnostics_to_json(list(a2[1]))


# ---------------------------------------------------------------------------
# resolve


def _resolve(text):
    ast, diags = dsl.parse_text(text)
    assert ast is not None, diags
    return dsl.resolve(ast)


def test_resolve_unknown_name():
    resolved, diags = _resolve(
        "require LiDAR { frequency >= 10 Hz }\nrequire F { frequency >= 10 Hz }\nnode x = F(Lidar)"
    )
    assert resolved is None
    assert any(d.code == "E-UNDEF" for d in diags)


def test_resolve_duplicate_declaration():
    resolved, diags = _resolve("require IMU { frequency >= 100 Hz }\nrequire IMU { frequency >= 50 Hz }")
    assert resolved is None
    assert any(d.code == "E-DUP" for d in diags)


def test_resolve_forward_reference_rejected():
    resolved, diags = _resolve(
        "require S { frequency >= 10 Hz }\nrequire F { frequency >= 10 Hz }\nrequire G { frequency >= 10 Hz }\n"
        "node a = F(b)\nnode b = G(S)"
    )
    assert resolved is None
    assert any(d.code == "E-UNDEF" for d in diags)


def test_resolve_operator_used_as_input():
    resolved, diags = _resolve(
        "require S { frequency >= 10 Hz }\nrequire F { frequency >= 10 Hz }\nrequire G { frequency >= 10 Hz }\n"
        "node a = F(S)\nnode b = G(F)"
    )
    assert resolved is None
    assert any(d.code == "E-UNDEF" and "operator" in d.message for d in diags)


def test_resolve_unused_source_warning():
    resolved, diags = _resolve(
        "require S { frequency >= 10 Hz }\nrequire T { frequency >= 10 Hz }\nrequire F { frequency >= 10 Hz }\n"
        "node a = F(S)"
    )
    assert resolved is not None
    assert any(d.code == "E-UNUSED" and d.severity == "warning" for d in diags)


def test_resolve_whole_fixtures_clean():
    for name in ("robot_vacuum.amg", "av.amg", "orb.amg", "diamond.amg"):
        program, diags = dsl.load_program(fixtures.path(name))
        assert program is not None
        assert not dsl.has_errors(diags), (name, [d.format_human() for d in diags])


# ---------------------------------------------------------------------------
# pretty print round trip


def _roundtrip(program):
    text = dsl.pretty_print(program)
    ast, diags = dsl.parse_text(text)
    assert ast is not None, (text, diags)
    reparsed, rdiags = dsl.resolve(ast)
    assert reparsed is not None, (text, rdiags)
    return reparsed


def test_roundtrip_fixtures():
    for name in ("robot_vacuum.amg", "av.amg", "orb.amg", "diamond.amg"):
        program, _ = dsl.load_program(fixtures.path(name))
        assert _roundtrip(program) == program, name


def test_roundtrip_empty_program():
    ast, _ = dsl.parse_text("")
    resolved, _ = dsl.resolve(ast)
    assert dsl.pretty_print(resolved) == ""


def test_roundtrip_annotations_and_contracts():
    text = (
        "require S { frequency >= 10 Hz }\n"
        "require F { frequency = 25 Hz; message_size = 123 B; window >= 5 ms }\n"
        "node a = F(S)\n"
        "require_map F on fpga\n"
        "hint F on gpu\n"
        "contract F { latency <= 4 ms; frequency >= 20 Hz }\n"
        "contract end_to_end { latency_std <= 2 ms; energy <= 9 W }\n"
    )
    ast, diags = dsl.parse_text(text)
    resolved, _ = dsl.resolve(ast)
    assert _roundtrip(resolved) == resolved


def test_roundtrip_random_programs():
    rng = random.Random(0xA3C)
    classes = list(dsl.DEVICE_CLASSES)
    for _ in range(60):
        n_src = rng.randint(1, 3)
        n_op = rng.randint(1, 4)
        lines = []
        sources = [f"S{i}" for i in range(n_src)]
        opnames = [f"Op{i}" for i in range(n_op)]
        for s in sources:
            parts = [f"frequency >= {rng.randint(1, 120)} Hz"]
            if rng.random() < 0.5:
                parts.append(f"message_size = {rng.randint(1, 10**6)} B")
            if rng.random() < 0.3:
                parts.append(f"resolution = {rng.randint(1, 1920)}x{rng.randint(1, 1080)}")
            lines.append(f"require {s} {{ {'; '.join(parts)} }}")
        for o in opnames:
            lines.append(f"require {o} {{ frequency >= {rng.randint(1, 120)} Hz }}")
        avail = list(sources)
        for i, o in enumerate(opnames):
            ins = rng.sample(avail, k=min(len(avail), rng.randint(1, 3)))
            lines.append(f"node r{i} = {o}({', '.join(ins)})")
            avail.append(f"r{i}")
        if rng.random() < 0.5:
            lines.append(f"hint {rng.choice(opnames)} on {rng.choice(classes)}")
        if rng.random() < 0.3:
            lines.append(f"contract end_to_end {{ latency <= {rng.randint(1, 500)} ms }}")
        text = "\n".join(lines)
        ast, diags = dsl.parse_text(text)
        assert ast is not None, (text, diags)
        resolved, rdiags = dsl.resolve(ast)
        assert resolved is not None, (text, rdiags)
        assert _roundtrip(resolved) == resolved, text


# ---------------------------------------------------------------------------
# diagnostics output


def test_diagnostics_json_shape():
    _, diags = dsl.parse_text("node x = F(")
    doc = json.loads(dsl.diagnostics_to_json(list(diags)))
    assert doc and set(doc[0]) == {"severity", "code", "line", "col", "len", "message"}
