#!/usr/bin/env python3
# Copyright 2026 The thzfl Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""End-to-end checks of the command-line tool: exit codes, outputs, schema."""

import json
import os
import subprocess
import sys
import tempfile
import unittest

CLI = sys.argv.pop(1)
SCHEMA = sys.argv.pop(1)

SMALL = {
    "seed": 3,
    "physics": {"n_subcarriers": 16},
    "data": {"n_train": 120, "n_test": 60, "input_dim": 12, "n_classes": 3},
    "fl": {"n_clients": 3, "rounds": 4, "hidden": 6},
}


def run(*args):
    return subprocess.run([CLI, *args], capture_output=True, text=True, timeout=300)


class CliTest(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def write_config(self, cfg, name="cfg.json"):
        path = os.path.join(self.tmp.name, name)
        with open(path, "w") as f:
            json.dump(cfg, f)
        return path

    def test_invalid_config_exits_2(self):
        path = self.write_config({"fl": {"rounds": 0}, "physics": {"bandwidth_hz": -1}, "typo": 1})
        for sub in ("run", "design-check"):
            p = run(sub, "--config", path)
            self.assertEqual(p.returncode, 2, p.stderr)
            for key in ("fl.rounds", "physics.bandwidth_hz", "typo"):
                self.assertIn(key, p.stderr)

    def test_other_failures_exit_1(self):
        self.assertEqual(run("run", "--config", os.path.join(self.tmp.name, "missing.json")).returncode, 1)
        self.assertEqual(run("preset", "no_such_preset").returncode, 1)

    def test_csv_run_and_sidecar(self):
        out = os.path.join(self.tmp.name, "r.csv")
        p = run("run", "--config", self.write_config(SMALL), "--out", out)
        self.assertEqual(p.returncode, 0, p.stderr)
        with open(out) as f:
            lines = f.read().splitlines()
        self.assertEqual(len(lines), 1 + SMALL["fl"]["rounds"])
        self.assertTrue(lines[0].startswith("schema_version,"))
        with open(out + ".config.json") as f:
            resolved = json.load(f)
        self.assertEqual(resolved["seed"], 3)
        self.assertEqual(resolved["fl"]["lr_local"], 0.02)

    def test_seed_override_and_determinism(self):
        path = self.write_config(SMALL)
        a = run("run", "--config", path).stdout
        b = run("run", "--config", path).stdout
        c = run("run", "--config", path, "--seed", "4").stdout
        self.assertEqual(a, b)
        self.assertNotEqual(a, c)
        env = dict(os.environ, THZFL_WORKERS="3")
        d = subprocess.run([CLI, "run", "--config", path], capture_output=True, text=True, env=env).stdout
        self.assertEqual(a, d)

    def test_json_output_matches_schema(self):
        try:
            import jsonschema
        except ImportError:
            self.skipTest("jsonschema not installed")
        with open(SCHEMA) as f:
            schema = json.load(f)
        cfg = dict(SMALL, link={"bits": 2}, fl=dict(SMALL["fl"], aggregation="snr_weighted"))
        for extra in ({}, {"physics": {"n_subcarriers": 16, "erasure_threshold": 1e9}}):
            p = run("run", "--config", self.write_config({**cfg, **extra}), "--format", "json")
            self.assertEqual(p.returncode, 0, p.stderr)
            records = json.loads(p.stdout)
            jsonschema.validate(records, schema)
            self.assertEqual(len(records), SMALL["fl"]["rounds"])

    def test_presets(self):
        p = run("list-presets")
        self.assertEqual(p.returncode, 0)
        names = [line.split()[0] for line in p.stdout.splitlines()]
        self.assertEqual(names, ["power_sweep", "squint", "jitter", "compensation", "distance",
                                 "bandwidth", "weighted_vs_fedavg"])
        p = run("preset", "jitter")
        self.assertEqual(p.returncode, 0)
        variants = json.loads(p.stdout)
        self.assertEqual([v["config"]["physics"]["geometry"]["jitter_std_rad"] for v in variants],
                         [0.0, 0.2, 0.4, 0.5, 0.8])

    def test_design_check(self):
        path = self.write_config(SMALL)
        p = run("design-check", "--config", path, "--json")
        self.assertEqual(p.returncode, 0, p.stderr)
        report = json.loads(p.stdout)
        self.assertEqual(len(report["inequalities"]), 7)
        text = run("design-check", "--config", path)
        self.assertEqual(text.returncode, 0)
        self.assertIn("assumed", text.stdout)


if __name__ == "__main__":
    unittest.main(verbosity=2)
