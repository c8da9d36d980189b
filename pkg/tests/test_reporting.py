"""Display rounding and file emission."""

from __future__ import annotations

from regimevar.reporting import ReportMeta, display_number, round_half_even, write_csv


class TestDisplayRounding:
    def test_paper_rounding_example(self):
        # stored coefficient -0.010996 prints as -0.011 in the comparison table
        assert display_number(-0.010996) == "-0.011"

    def test_four_decimals_kept(self):
        assert display_number(0.140342) == "0.1403"
        assert display_number(-0.004468) == "-0.0045"
        assert display_number(1.164620) == "1.1646"
        assert display_number(15.865984) == "15.866"
        assert display_number(-7.025551) == "-7.0256"

    def test_half_even_tie_break(self):
        assert round_half_even(0.00125, 4) == 0.0012
        assert round_half_even(0.00135, 4) == 0.0014
        assert round_half_even(2.5, 0) == 2.0
        assert round_half_even(3.5, 0) == 4.0

    def test_integers_and_strings_pass_through(self):
        assert display_number(7) == "7"
        assert display_number("not computed") == "not computed"
        assert display_number(None) == ""

    def test_negative_zero_normalized(self):
        assert display_number(-0.00001) == "0"


class TestWriters:
    def meta(self):
        return ReportMeta(config_hash="abc123", master_seed=42,
                          cholesky_ordering=("a", "b"))

    def test_header_block(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, self.meta(), ("x",), [(1.23456789,)])
        lines = path.read_text().splitlines()
        assert lines[0] == "# config_hash: abc123"
        assert lines[1] == "# master_seed: 42"
        assert lines[2].startswith("# artifact_version:")
        assert lines[3] == "# cholesky_ordering: a,b"
        assert lines[4] == "x"
        assert lines[5] == "1.2346"

    def test_full_precision_mode(self, tmp_path):
        path = tmp_path / "t.csv"
        value = 1.2345678901234567
        write_csv(path, self.meta(), ("x",), [(value,)], display=False)
        assert repr(value) in path.read_text()

    def test_byte_identical_rewrites(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        rows = [(0.1, -0.2), (3.0, 4.5)]
        write_csv(a, self.meta(), ("x", "y"), rows)
        write_csv(b, self.meta(), ("x", "y"), rows)
        assert a.read_bytes() == b.read_bytes()
