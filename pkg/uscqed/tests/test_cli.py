import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

from ..cli import main
from ..csv_io import ResultReader


class TestUSCQEDCLI(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.out_dir = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def write_config(self, payload):
        path = os.path.join(self.out_dir, "config.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f)
        return path

    def run_cli(self, argv):
        stdout_buffer = io.StringIO()
        stderr_buffer = io.StringIO()
        with redirect_stdout(stdout_buffer), redirect_stderr(stderr_buffer):
            exit_code = main(argv)
        return exit_code, stdout_buffer.getvalue(), stderr_buffer.getvalue()

    def test_circuit_check_writes_tables_and_sidecar(self):
        config = self.write_config({"experiment": "circuit-check", "grids": {"dphi": {"start": 0, "stop": 2, "num": 21}}})
        exit_code, out, _ = self.run_cli(["circuit-check", "--config", config, "--out", self.out_dir])
        self.assertEqual(exit_code, 0)
        written = out.strip().splitlines()
        self.assertEqual(len(written), 3)
        header, data = ResultReader.load_csv(os.path.join(self.out_dir, "run_circuit-check.csv"))
        self.assertEqual(header, ["dphi_freq_GHz", "cos_theta", "J_GHz", "deltaE_GHz", "margin_ratio"])
        self.assertEqual(data.shape, (21, 5))
        sidecar = ResultReader.load_sidecar(os.path.join(self.out_dir, "run_circuit-check.json"))
        self.assertAlmostEqual(sidecar["metrics"]["cos_theta_max"], 0.486, delta=0.005)
        self.assertIn("uscqed_version", sidecar)
        self.assertEqual(sidecar["config"]["experiment"], "circuit-check")
        self.assertTrue(os.path.exists(os.path.join(self.out_dir, "run_circuit-check_levels.csv")))

    def test_config_error_exit_code(self):
        config = self.write_config({"experiment": "spectrum", "model": {"g": -0.5}})
        exit_code, _, err = self.run_cli(["spectrum", "--config", config])
        self.assertEqual(exit_code, 1)
        self.assertIn("configuration error", err)

    def test_missing_config_file(self):
        exit_code, _, err = self.run_cli(["spectrum", "--config", os.path.join(self.out_dir, "none.json")])
        self.assertEqual(exit_code, 1)
        self.assertIn("cannot read config", err)

    def test_simulation_error_writes_diagnostics(self):
        config = self.write_config(
            {
                "experiment": "g2zero-sweep",
                "model": {"Omega": 0.0, "n_fock": 4, "n_dressed": 4},
                "grids": {"omega_d": [1.0]},
                "output": {"directory": self.out_dir, "prefix": "dark"},
            }
        )
        exit_code, _, err = self.run_cli(["g2zero-sweep", "--config", config])
        self.assertEqual(exit_code, 2)
        self.assertIn("simulation failed", err)
        diagnostics = os.path.join(self.out_dir, "dark_g2zero-sweep_diagnostics.json")
        with open(diagnostics, "r", encoding="utf-8") as f:
            payload = json.load(f)
        self.assertEqual(payload["error"], "DenominatorUnderflow")
        self.assertIn("flux", payload["context"])

    def test_simulation_error_with_debug(self):
        config = self.write_config(
            {
                "experiment": "g2zero-sweep",
                "model": {"Omega": 0.0, "n_fock": 4, "n_dressed": 4},
                "grids": {"omega_d": [1.0]},
                "output": {"directory": self.out_dir},
            }
        )
        exit_code, _, err = self.run_cli(["g2zero-sweep", "--config", config, "--debug"])
        self.assertEqual(exit_code, 2)
        self.assertIn("Traceback", err)
        self.assertIn("DenominatorUnderflow", err)

    def test_flux_demo_and_rate_dump(self):
        config = self.write_config(
            {
                "experiment": "flux-demo",
                "model": {"n_fock": 15, "n_dressed": 8},
                "grids": {"g": [0.0, 0.2]},
            }
        )
        exit_code, _, _ = self.run_cli(["flux-demo", "--config", config, "--out", self.out_dir, "--dump-rates"])
        self.assertEqual(exit_code, 0)
        header, data = ResultReader.load_csv(os.path.join(self.out_dir, "run_flux-demo.csv"))
        self.assertEqual(header, ["g", "output_flux_ground", "naive_photon_number_ground"])
        self.assertEqual(list(data[:, 1]), [0.0, 0.0])
        self.assertGreater(data[1, 2], 0.0)
        with open(os.path.join(self.out_dir, "run_flux-demo_rates.csv"), "r", encoding="utf-8") as f:
            self.assertTrue(f.readline().startswith("channel,j,k"))

    def test_log_file_option(self):
        config = self.write_config({"experiment": "circuit-check", "grids": {"dphi": [0.0, 1.0]}})
        log_path = os.path.join(self.out_dir, "run.log")
        exit_code, _, _ = self.run_cli(
            ["circuit-check", "--config", config, "--out", self.out_dir, "-v", "--log-file", log_path]
        )
        self.assertEqual(exit_code, 0)
        with open(log_path, "r", encoding="utf-8") as f:
            self.assertIn("cos(theta)_max", f.read())


if __name__ == "__main__":
    unittest.main()
