"""
Unit tests for the JSON/CSV codecs and the command-line interface.
"""

import io
import json
import math
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

import numpy as np

from src.channels.ldp import sldp_family
from src.constructions.complexity import SampleComplexityEstimate
from src.errors import DimensionMismatchError, InvalidDistributionError, SerializationError
from src.main import EXIT_OK, EXIT_USAGE, main
from src.models.distributions import Channel, Distribution
from src.optimization.optimizer import maximize_comm
from src.serialization import (
    channel_from_dict,
    channel_to_dict,
    family_from_dict,
    pair_from_dict,
    pair_to_dict,
    parse_json,
    read_curve_csv,
    result_to_dict,
    to_json,
    write_curve_csv,
)


class TestJsonCodecs(unittest.TestCase):
    """Test JSON encoding of pairs, channels and families."""

    def test_pair_floats_survive_exactly(self):
        """Test emitted floats parse back bit for bit."""
        p = Distribution([0.1, 0.2, 0.7])
        q = Distribution.normalized([1.0, 3.0, 7.0])
        restored_p, restored_q = pair_from_dict(parse_json(to_json(pair_to_dict(p, q))))
        self.assertEqual(restored_p.to_list(), p.to_list())
        self.assertEqual(restored_q.to_list(), q.to_list())

    def test_channel_rows(self):
        """Test channels are stored row-major."""
        channel = Channel([[0.75, 0.25, 1.0], [0.25, 0.75, 0.0]])
        data = channel_to_dict(channel)
        self.assertEqual(data["matrix"][0], [0.75, 0.25, 1.0])
        np.testing.assert_array_equal(channel_from_dict(data).matrix, channel.matrix)

    def test_bad_documents(self):
        """Test malformed JSON is reported as a serialization error."""
        for text in ("{", "[1, 2]", '{"q": [0.5, 0.5]}', '{"p": [true, 0.5], "q": [0.5, 0.5]}'):
            with self.assertRaises(SerializationError):
                pair_from_dict(parse_json(text))

    def test_pair_length_mismatch(self):
        """Test p and q must have the same length."""
        with self.assertRaises(DimensionMismatchError):
            pair_from_dict({"p": [0.5, 0.5], "q": [0.2, 0.3, 0.5]})

    def test_pair_not_a_distribution(self):
        """Test pair values are validated."""
        with self.assertRaises(InvalidDistributionError):
            pair_from_dict({"p": [0.5, 0.6], "q": [0.5, 0.5]})

    def test_ragged_matrix(self):
        """Test rows of different lengths are refused."""
        with self.assertRaises(SerializationError):
            channel_from_dict({"matrix": [[1.0, 0.0], [0.0]]})

    def test_family(self):
        """Test an SLDP family survives a dict round trip."""
        family = sldp_family(3, 2, 1.0, 0.1)
        restored = family_from_dict(json.loads(json.dumps(family.to_dict())))
        self.assertEqual(restored.gamma, family.gamma)
        self.assertEqual(restored.nu, family.nu)
        with self.assertRaises(SerializationError):
            family_from_dict({"gamma": [1.0], "nu": [0.0], "k": 2.5})

    def test_result(self):
        """Test optimizer results carry value, matrix and certificate."""
        result = maximize_comm([0.1, 0.3, 0.6], [0.6, 0.3, 0.1], 2)
        data = json.loads(to_json(result_to_dict(result)))
        self.assertEqual(data["objective"], "hellinger_sq")
        self.assertEqual(data["value"], result.value)
        self.assertEqual(data["certificate"]["kind"], "threshold")
        self.assertEqual(len(data["matrix"]), 2)


class TestCurveCsv(unittest.TestCase):
    """Test the curve CSV format."""

    def test_write_and_read(self):
        """Test rows keep 17 significant digits and infinite estimates."""
        curve = [
            SampleComplexityEstimate(0.0, 2, 0.0, Channel.constant(2, 2), "rr-binary"),
            SampleComplexityEstimate(math.log(3.0), 2, 1.0 / 3.0, Channel.identity(2), "rr-binary"),
        ]
        stream = io.StringIO()
        self.assertEqual(write_curve_csv(stream, curve), 2)
        self.assertTrue(stream.getvalue().startswith("eps,e_eps,n_hat,certificate\n"))
        rows = read_curve_csv(io.StringIO(stream.getvalue()))
        self.assertEqual(rows[0]["n_hat"], math.inf)
        self.assertEqual(rows[1]["eps"], math.log(3.0))
        self.assertEqual(rows[1]["certificate"], "rr-binary")

    def test_wrong_header(self):
        """Test a foreign CSV is refused."""
        with self.assertRaises(SerializationError):
            read_curve_csv(io.StringIO("a,b,c,d\n1,2,3,x\n"))

    def test_bad_number(self):
        """Test unparsable numbers are refused."""
        with self.assertRaises(SerializationError):
            read_curve_csv(io.StringIO("eps,e_eps,n_hat,certificate\n1,two,3,x\n"))


class TestCommandLine(unittest.TestCase):
    """Test the command-line entry point."""

    def setUp(self):
        """Write a pair file into a temporary directory."""
        self.tmp = tempfile.TemporaryDirectory()
        self.pair = os.path.join(self.tmp.name, "pair.json")
        with open(self.pair, "w", encoding="utf-8") as f:
            json.dump({"p": [0.1, 0.3, 0.6], "q": [0.6, 0.3, 0.1]}, f)

    def tearDown(self):
        self.tmp.cleanup()

    def _run(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        with redirect_stdout(stdout), redirect_stderr(stderr):
            code = main(list(argv) + ["--log-level", "ERROR"])
        return code, stdout.getvalue()

    def test_optimize(self):
        """Test optimize prints the result JSON."""
        code, out = self._run("optimize", "--pair", self.pair, "--family", "ldp", "--eps", "1.0", "--l", "2")
        self.assertEqual(code, EXIT_OK)
        data = json.loads(out)
        self.assertGreater(data["value"], 0.0)
        self.assertEqual(data["certificate"]["kind"], "decomposition")

    def test_optimize_writes_file(self):
        """Test --out writes the JSON to a file."""
        target = os.path.join(self.tmp.name, "result.json")
        code, out = self._run("optimize", "--pair", self.pair, "--family", "comm", "--l", "2", "--out", target)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out, "")
        with open(target, encoding="utf-8") as f:
            self.assertEqual(json.load(f)["certificate"]["kind"], "threshold")

    def test_missing_eps(self):
        """Test a private family without --eps is a usage error."""
        code, _ = self._run("optimize", "--pair", self.pair, "--family", "ldp")
        self.assertEqual(code, EXIT_USAGE)

    def test_missing_pair_file(self):
        """Test an unreadable pair file is a usage error."""
        code, _ = self._run("optimize", "--pair", os.path.join(self.tmp.name, "none.json"), "--family", "comm")
        self.assertEqual(code, EXIT_USAGE)

    def test_construct_worst_case(self):
        """Test construct reports the pair and its divergences."""
        code, out = self._run("construct", "--kind", "worst-case", "--rho", "0.05", "--nu", "0.1")
        self.assertEqual(code, EXIT_OK)
        data = json.loads(out)
        self.assertAlmostEqual(data["hellinger_sq"], 0.05, delta=1e-12)
        self.assertAlmostEqual(data["tv"], 0.1, places=14)

    def test_construct_rejects_half_region(self):
        """Test --rho without --nu is a usage error."""
        code, _ = self._run("construct", "--kind", "worst-case", "--rho", "0.05")
        self.assertEqual(code, EXIT_USAGE)

    def test_enumerate_threshold(self):
        """Test C(k + l - 1, l - 1) threshold channels are listed."""
        code, out = self._run("enumerate", "--what", "threshold", "--k", "3", "--l", "2")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)["count"], 4)

    def test_enumerate_extreme(self):
        """Test the binary pure family has four extreme points."""
        code, out = self._run("enumerate", "--what", "extreme", "--k", "2", "--l", "2", "--eps", str(math.log(3.0)))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)["count"], 4)

    def test_simulate(self):
        """Test simulate reports both error types."""
        code, out = self._run("simulate", "--pair", self.pair, "--rr", "2.0", "--n", "20", "--trials", "500")
        self.assertEqual(code, EXIT_OK)
        data = json.loads(out)
        self.assertEqual(data["trials"], 500)
        self.assertLessEqual(data["error_sum"], 2.0)

    def test_curve(self):
        """Test curve writes one CSV row per eps."""
        code, out = self._run("curve", "--preset", "moderate", "--binary", "--eps-grid", "0.5,1,2")
        self.assertEqual(code, EXIT_OK)
        rows = read_curve_csv(io.StringIO(out))
        self.assertEqual([row["eps"] for row in rows], [0.5, 1.0, 2.0])

    def test_seed_only_on_random_commands(self):
        """Test deterministic commands refuse --seed while simulate accepts it."""
        for argv in (["optimize", "--pair", self.pair, "--family", "comm", "--seed", "3"],
                     ["curve", "--preset", "moderate", "--binary", "--seed", "3"]):
            with redirect_stderr(io.StringIO()):
                with self.assertRaises(SystemExit) as context:
                    main(argv)
            self.assertEqual(context.exception.code, EXIT_USAGE)
        code, out = self._run("simulate", "--pair", self.pair, "--rr", "2.0", "--n", "10",
                              "--trials", "200", "--seed", "3")
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)["seed"], 3)

    def test_unknown_suite(self):
        """Test argparse rejects unknown suites with exit status 2."""
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as context:
                main(["verify", "--suite", "nonsense"])
        self.assertEqual(context.exception.code, EXIT_USAGE)


if __name__ == "__main__":
    unittest.main()
