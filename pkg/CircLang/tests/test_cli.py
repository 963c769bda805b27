import json
import math
import os
import tempfile
import unittest
from unittest import mock

from click.testing import CliRunner

from langevin import kernel
from langevin import specfun
from langevin.malliavin import compose
from langevin.models import QuadResult
from langevin.models import RunManifest
from langevin.models import TargetPoint
from main import cli


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.runner = CliRunner()
        self.tmp = tempfile.TemporaryDirectory()
        self.out = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def invoke(self, *args, env=None):
        return self.runner.invoke(cli, list(args), env=env or {})

    def manifest(self, command: str, directory: str = None) -> RunManifest:
        path = os.path.join(directory or self.out, f"{command}_manifest.json")
        with open(path, encoding="utf-8") as handle:
            return RunManifest.from_json(handle.read())


class ConstantsCommandTest(CliTestCase):

    def test_json_report(self):
        result = self.invoke("constants", "--json", "--out", self.out)
        self.assertEqual(result.exit_code, 0, msg=result.output)
        document = json.loads(result.output)
        reports = {report["name"]: report for report in document["constants"]}
        self.assertEqual(set(reports), {"sigma", "sigma_prime", "theta_1", "C_squared", "f(pi^2,0)"})
        self.assertGreater(reports["sigma"]["value"], 0.1)
        self.assertGreater(reports["sigma_prime"]["value"], 0.1)
        self.assertTrue(all(report["passed"] for report in reports.values()))
        self.assertAlmostEqual(reports["f(pi^2,0)"]["value"], 1.0 - math.tanh(math.pi / 2) / (math.pi / 2), places=12)
        self.assertEqual(self.manifest("constants").command, "constants")

    def test_loose_tolerance_still_meets_bounds(self):
        result = self.invoke("constants", "--tol", "0.1", "--out", self.out)
        self.assertEqual(result.exit_code, 0, msg=result.output)
        self.assertIn("Constants", result.output)

    def test_unconverged_quadrature_exits_3(self):
        unconverged = QuadResult(value=0.6, abs_error_estimate=1.0, n_evals=1, converged=False)
        with mock.patch("langevin.quad.sigma_const", return_value=unconverged):
            result = self.invoke("constants", "--json", "--out", self.out)
        self.assertEqual(result.exit_code, 3, msg=result.output)
        reports = {report["name"]: report for report in json.loads(result.output)["constants"]}
        self.assertFalse(reports["sigma"]["converged"])
        self.assertTrue(reports["sigma_prime"]["converged"])
        self.assertEqual(self.manifest("constants").command, "constants")

    def test_unexpected_exception_is_reported(self):
        with mock.patch("services.services_circlang.ServicesCircLang.compute_constants",
                        side_effect=FloatingPointError("overflow in exp")), \
                mock.patch("controllers.main_controller_circlang.capture_exception") as captured:
            result = self.invoke("constants", "--out", self.out)
        self.assertEqual(result.exit_code, 3)
        self.assertIn("overflow in exp", result.output)
        captured.assert_called_once()
        self.assertEqual(self.manifest("constants").command, "constants")


class KernelCommandTest(CliTestCase):

    def kernel_json(self, *args, env=None):
        result = self.invoke("kernel", "--json", "--out", self.out, *args, env=env)
        self.assertEqual(result.exit_code, 0, msg=result.output)
        return json.loads(result.output)

    def test_non_degenerate(self):
        report = self.kernel_json("--eps", "0.1", "--w", "1", "--y", "0.08", "--z", "0.03")
        self.assertEqual(report["regime"], "NonDegenerate")
        self.assertAlmostEqual(report["log_density"], report["log_prefactor"] + report["exponent"], places=9)

    def test_degenerate_axis(self):
        report = self.kernel_json("--eps", "0.1", "--w", "0", "--y", "-0.05", "--z", "0")
        self.assertEqual(report["regime"], "DegenerateAxis")
        self.assertAlmostEqual(report["exponent"], -4.0 * math.pi ** 2 * 0.15 / 0.01, places=8)

    def test_unconverged_constant_exits_3(self):
        kernel.sigma_value.cache_clear()
        self.addCleanup(kernel.sigma_value.cache_clear)
        unconverged = QuadResult(value=0.6, abs_error_estimate=1.0, n_evals=1, converged=False)
        with mock.patch("langevin.quad.sigma_const", return_value=unconverged):
            result = self.invoke("kernel", "--eps", "0.1", "--w", "0", "--y", "-0.05", "--out", self.out)
        self.assertEqual(result.exit_code, 3, msg=result.output)
        self.assertIn("did not converge", result.output)

    def test_shifted_start_matches_unshifted(self):
        step = TargetPoint(1.0, 0.04, 0.03)
        start = TargetPoint(0.7, -0.4, 1.1)
        target = compose(start, step)
        plain = self.kernel_json("--eps", "0.1", "--w", "1.0", "--y", "0.04", "--z", "0.03")
        shifted = self.kernel_json("--eps", "0.1", "--w", repr(target.w), "--y", repr(target.y),
                                   "--z", repr(target.z), "--start", f"{start.w!r},{start.y!r},{start.z!r}")
        self.assertAlmostEqual(shifted["log_density"], plain["log_density"], delta=1e-10 * abs(plain["log_density"]))

    def test_outside_support_is_refused(self):
        result = self.invoke("kernel", "--eps", "0.1", "--w", "1", "--y", "0.2", "--out", self.out)
        self.assertEqual(result.exit_code, 2)
        self.assertIn("outside the support", result.output)

    def test_domain_error_names_the_regime(self):
        result = self.invoke("kernel", "--eps", "1.0", "--w", "0", "--y", "0", "--z", "0.1", "--out", self.out)
        self.assertEqual(result.exit_code, 2)
        self.assertIn("DegenerateGeneric", result.output)

    def test_malformed_start(self):
        result = self.invoke("kernel", "--eps", "0.1", "--start", "1,2", "--out", self.out)
        self.assertEqual(result.exit_code, 2)

    def test_seed_from_environment(self):
        self.kernel_json("--eps", "0.1", env={"CIRCLANG_SEED": "42"})
        self.assertEqual(self.manifest("kernel").seed, 42)
        self.kernel_json("--eps", "0.1", "--seed", "7", env={"CIRCLANG_SEED": "42"})
        self.assertEqual(self.manifest("kernel").seed, 7)

    def test_bad_seed_in_environment(self):
        result = self.invoke("kernel", "--eps", "0.1", "--out", self.out, env={"CIRCLANG_SEED": "abc"})
        self.assertEqual(result.exit_code, 2)


class ExportCommandTest(CliTestCase):

    def test_kernel_sweep_csv(self):
        result = self.invoke("export", "--run", "kernel-sweep", "--format", "csv", "--out", self.out)
        self.assertEqual(result.exit_code, 0, msg=result.output)
        path = os.path.join(self.out, "kernel-sweep.csv")
        with open(path, "rb") as handle:
            raw = handle.read()
        self.assertNotIn(b"\r", raw)
        lines = raw.decode("utf-8").splitlines()
        self.assertEqual(lines[0], "epsilon[time],log_prefactor[nat],exponent[nat],log_density[nat]")
        rows = [[float(cell) for cell in line.split(",")] for line in lines[1:]]
        self.assertEqual(len(rows), 64)
        exponents = [row[2] for row in rows]
        self.assertTrue(all(a < b for a, b in zip(exponents, exponents[1:])))
        self.assertIn(path, self.manifest("export").outputs)

    def test_phi_table_json_matches_direct_calls(self):
        result = self.invoke("export", "--run", "phi-table", "--format", "json", "--points", "20", "--out", self.out)
        self.assertEqual(result.exit_code, 0, msg=result.output)
        with open(os.path.join(self.out, "phi-table.json"), encoding="utf-8") as handle:
            text = handle.read()
        document = json.loads(text)
        self.assertEqual(list(document), sorted(document))
        self.assertEqual(document["columns"][0], "x[1]")
        for x, modulus, _, real, imag in document["rows"][::5]:
            value = specfun.Phi_axis(x)
            self.assertAlmostEqual(modulus, abs(value), delta=1e-12 * max(1.0, abs(value)))
            self.assertAlmostEqual(real, value.real, delta=1e-12 * max(1.0, abs(value)))
            self.assertAlmostEqual(imag, value.imag, delta=1e-12 * max(1.0, abs(value)))

    def test_replay_reproduces_output(self):
        result = self.invoke("export", "--run", "kernel-sweep", "--w", "2", "--points", "12", "--out", self.out)
        self.assertEqual(result.exit_code, 0, msg=result.output)
        with tempfile.TemporaryDirectory() as second:
            replayed = self.invoke("replay", os.path.join(self.out, "export_manifest.json"), "--out", second)
            self.assertEqual(replayed.exit_code, 0, msg=replayed.output)
            self.assertIn("Replaying 'export'", replayed.output)
            with open(os.path.join(self.out, "kernel-sweep.csv"), "rb") as first_file, \
                    open(os.path.join(second, "kernel-sweep.csv"), "rb") as second_file:
                self.assertEqual(first_file.read(), second_file.read())
            self.assertEqual(self.manifest("export", second).parameters["w"], 2.0)

    def test_replay_rejects_unknown_command(self):
        path = os.path.join(self.out, "bogus_manifest.json")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(RunManifest("plot", {}, 0, {}).to_json())
        result = self.invoke("replay", path)
        self.assertEqual(result.exit_code, 2)


class ValidateCommandTest(CliTestCase):

    def test_selected_fast_checks(self):
        result = self.invoke("validate", "--suite", "fast", "--check", "theta_root", "--check", "ratio_origin",
                             "--check", "small_w_scaling", "--json", "--out", self.out)
        self.assertEqual(result.exit_code, 0, msg=result.output)
        document = json.loads(result.output)
        self.assertTrue(document["passed"])
        self.assertEqual([r["name"] for r in document["results"]], ["small_w_scaling", "theta_root", "ratio_origin"])
        self.assertTrue(all(r["status"] == "PASS" for r in document["results"]))
        manifest = self.manifest("validate")
        self.assertEqual(manifest.parameters["suite"], "fast")

    def test_table_output(self):
        result = self.invoke("validate", "--check", "delta_identity", "--out", self.out)
        self.assertEqual(result.exit_code, 0, msg=result.output)
        self.assertIn("PASS", result.output)

    def test_unknown_check(self):
        result = self.invoke("validate", "--check", "nope", "--out", self.out)
        self.assertEqual(result.exit_code, 2)

    def test_unknown_suite_is_a_usage_error(self):
        result = self.invoke("validate", "--suite", "nightly", "--out", self.out)
        self.assertEqual(result.exit_code, 2)


if __name__ == '__main__':
    unittest.main()
