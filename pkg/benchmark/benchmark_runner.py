#!/usr/bin/env python3
"""
uscqed 实验耗时基准
对 recipes/ 下的运行配置逐个计时，结果写入带时间戳的 JSON
"""

import argparse
import json
import logging
import os
import statistics
import sys
import tempfile
import time
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from uscqed import __version__  # noqa: E402
from uscqed.config import load_config  # noqa: E402
from uscqed.experiments import run  # noqa: E402
from uscqed.sim_errors import ConfigError, SimulationError  # noqa: E402

logger = logging.getLogger("uscqed.benchmark")

# 默认只计时较快的配方，完整扫描用 --recipe 指定
DEFAULT_RECIPES = [
    "circuit-check.json",
    "flux-demo.json",
    "spectrum.json",
    "convergence.json",
]


class RecipeBenchmarkRunner:
    def __init__(self, recipes_dir: Path, results_dir: Path, threads: int = 1):
        self.recipes_dir = recipes_dir
        self.results_dir = results_dir
        self.threads = threads
        self.results_dir.mkdir(parents=True, exist_ok=True)

    def time_recipe(self, recipe: Path) -> Dict:
        """运行一次配方，返回耗时与写出的文件数"""
        config = load_config(recipe)
        with tempfile.TemporaryDirectory() as scratch:
            config = replace(config, output=replace(config.output, directory=scratch))
            start = time.perf_counter()
            paths = run(config, self.threads)
            elapsed = time.perf_counter() - start
        return {"time": elapsed, "files": len(paths)}

    def run_suite(self, recipes: List[str], iterations: int = 3) -> Dict:
        results = {
            "test_info": {
                "timestamp": time.strftime("%Y-%m-%d %H:%M:%S"),
                "iterations": iterations,
                "threads": self.threads,
                "uscqed_version": __version__,
                "python_version": sys.version,
                "system_info": {
                    "platform": sys.platform,
                    "processor": os.uname().machine if hasattr(os, "uname") else "unknown",
                    "cpu_count": os.cpu_count(),
                },
            },
            "tests": {},
        }

        for name in recipes:
            recipe = self.recipes_dir / name
            print(f"\nRunning {name} ...")
            times: List[float] = []
            entry: Dict = {"recipe": name}
            for i in range(iterations):
                print(f"  Iteration {i + 1}/{iterations}")
                try:
                    outcome = self.time_recipe(recipe)
                except (ConfigError, SimulationError, OSError) as exc:
                    entry["error"] = f"{type(exc).__name__}: {exc}"
                    print(f"    failed: {entry['error']}")
                    break
                times.append(outcome["time"])
                entry["files"] = outcome["files"]

            if times:
                entry.update(
                    {
                        "times": times,
                        "avg_time": statistics.mean(times),
                        "min_time": min(times),
                        "max_time": max(times),
                        "std_dev": statistics.stdev(times) if len(times) > 1 else 0,
                    }
                )
            results["tests"][name] = entry
        return results

    def save_results(self, results: Dict, filename: Optional[str] = None) -> Path:
        if filename is None:
            timestamp = time.strftime("%Y%m%d_%H%M%S")
            filename = f"benchmark_results_{timestamp}.json"
        result_path = self.results_dir / filename
        with open(result_path, "w", encoding="utf-8") as f:
            json.dump(results, f, indent=2, ensure_ascii=False)
        print(f"\nResults saved to: {result_path}")
        return result_path

    def print_summary(self, results: Dict) -> None:
        print("\n" + "=" * 60)
        print("RECIPE BENCHMARK SUMMARY")
        print("=" * 60)
        info = results.get("test_info", {})
        print(f"Test Time: {info.get('timestamp')}")
        print(f"Iterations: {info.get('iterations')}  Threads: {info.get('threads')}")
        print()
        print(f"{'Recipe':<32} {'Avg (s)':<10} {'Min (s)':<10} {'Std':<8}")
        print("-" * 64)
        for name, data in results.get("tests", {}).items():
            if "avg_time" not in data:
                print(f"{name:<32} {'FAILED':<10}")
                continue
            print(f"{name:<32} {data['avg_time']:<10.3f} {data['min_time']:<10.3f} {data['std_dev']:<8.3f}")


def main() -> None:
    parser = argparse.ArgumentParser(description="uscqed 实验耗时基准")
    parser.add_argument("-i", "--iterations", type=int, default=3, help="每个配方的运行次数 (default: 3)")
    parser.add_argument("-o", "--output", type=str, help="结果输出文件名")
    parser.add_argument("-j", "--threads", type=int, default=1, help="参数扫描的工作进程数")
    parser.add_argument("--recipe", action="append", help="要计时的配方文件名，可重复 (默认: 快速配方)")
    parser.add_argument("--recipes-dir", type=str, default=str(PROJECT_ROOT / "recipes"))
    parser.add_argument("--results-dir", type=str, default=str(PROJECT_ROOT / "benchmark" / "results"))
    args = parser.parse_args()

    logging.basicConfig(level=logging.WARNING, format="%(asctime)s [%(levelname)s] %(name)s: %(message)s")
    runner = RecipeBenchmarkRunner(Path(args.recipes_dir), Path(args.results_dir), args.threads)
    results = runner.run_suite(args.recipe or DEFAULT_RECIPES, iterations=args.iterations)
    runner.save_results(results, args.output)
    runner.print_summary(results)


if __name__ == "__main__":
    main()
