#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "test_util.hpp"

namespace testutil {

// Writes a polyglot repository of `files` source files: half Python, 30%
// TypeScript, 20% Go, ten files per package. Every file imports and calls
// up to two files of the same language from lower-numbered packages, so
// the reference graph is dense but acyclic across packages. pkg0/mod0.py
// and the Go package p0 are entry points.
inline void write_synthetic_repo(const std::filesystem::path& root, std::size_t files, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t per_pkg = 10;
  const std::size_t n_py = files / 2;
  const std::size_t n_ts = files * 3 / 10;
  const std::size_t n_go = files - n_py - n_ts;

  auto pick_earlier = [&](std::size_t pkg, std::size_t lo) -> std::pair<std::size_t, std::size_t> {
    std::uniform_int_distribution<std::size_t> p(lo, pkg - 1), m(0, per_pkg - 1);
    return {p(rng), m(rng)};
  };

  for (std::size_t i = 0; i < n_py; ++i) {
    const auto pkg = i / per_pkg, mod = i % per_pkg;
    const auto name = "f_" + std::to_string(pkg) + "_" + std::to_string(mod);
    std::string imports, calls = "x";
    if (pkg > 0)
      for (int k = 0; k < 2; ++k) {
        const auto [p, m] = pick_earlier(pkg, 0);
        const auto callee = "f_" + std::to_string(p) + "_" + std::to_string(m);
        imports += "from pkg" + std::to_string(p) + ".mod" + std::to_string(m) + " import " + callee + "\n";
        calls = callee + "(" + calls + ")";
      }
    std::string body = "\"\"\"Synthetic module " + name + ".\"\"\"\n" + imports + "\n\ndef " + name +
                       "(x):\n    return " + calls + " + 1\n\n\nclass Worker_" + name +
                       ":\n    def run(self, x):\n        return " + name + "(x) * 2\n";
    if (i == 0) body += "\n\nif __name__ == \"__main__\":\n    print(" + name + "(1))\n";
    write_file(root / ("pkg" + std::to_string(pkg) + "/mod" + std::to_string(mod) + ".py"), body);
  }

  for (std::size_t i = 0; i < n_ts; ++i) {
    const auto pkg = i / per_pkg, mod = i % per_pkg;
    const auto name = "g_" + std::to_string(pkg) + "_" + std::to_string(mod);
    std::string imports, calls = "x";
    if (pkg > 0)
      for (int k = 0; k < 2; ++k) {
        const auto [p, m] = pick_earlier(pkg, 0);
        const auto callee = "g_" + std::to_string(p) + "_" + std::to_string(m);
        imports += "import { " + callee + " } from \"../p" + std::to_string(p) + "/m" + std::to_string(m) + "\";\n";
        calls = callee + "(" + calls + ")";
      }
    write_file(root / ("web/p" + std::to_string(pkg) + "/m" + std::to_string(mod) + ".ts"),
               imports + "\n// Synthetic view " + name + ".\nexport function " + name +
                   "(x: number): number {\n  return " + calls + " + 1;\n}\n");
  }

  write_file(root / "svc/go.mod", "module example.com/synth\n\ngo 1.21\n");
  for (std::size_t i = 0; i < n_go; ++i) {
    const auto pkg = i / per_pkg, mod = i % per_pkg;
    const auto pkg_name = pkg == 0 ? std::string("main") : "p" + std::to_string(pkg);
    const auto name = "H" + std::to_string(pkg) + "_" + std::to_string(mod);
    std::string imports, calls = "x";
    if (pkg > 1)
      for (int k = 0; k < 2; ++k) {
        const auto [p, m] = pick_earlier(pkg, 1);
        imports += "import \"example.com/synth/p" + std::to_string(p) + "\"\n";
        calls = "p" + std::to_string(p) + ".H" + std::to_string(p) + "_" + std::to_string(m) + "(" + calls + ")";
      }
    std::string body = "package " + pkg_name + "\n\n" + imports + "\n// " + name + " is synthetic.\nfunc " + name +
                       "(x int) int {\n\treturn " + calls + " + 1\n}\n";
    if (i == 0) body += "\nfunc main() {\n\tprintln(" + name + "(1))\n}\n";
    write_file(root / ("svc/p" + std::to_string(pkg) + "/f" + std::to_string(mod) + ".go"), body);
  }
}

}  // namespace testutil
