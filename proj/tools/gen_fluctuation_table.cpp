// Simulates the 5% two-sided critical values of the fluctuation test and
// writes them as CSV and as the table compiled into the library.
//
//   gen_fluctuation_table --paths 100000 --steps 1000 \
//       --csv data/fluctuation_critical_values.csv \
//       --inc core/src/fluctuation_table.inc

#include <charconv>
#include <fstream>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "favar/evaluate.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulate fluctuation test critical values"};
  std::size_t paths = 100000;
  std::size_t steps = 1000;
  std::uint64_t seed = 20100101;
  std::size_t threads = 0;
  double alpha = 0.05;
  std::string csv_path = "fluctuation_critical_values.csv";
  std::string inc_path;
  app.add_option("--paths", paths, "Brownian paths");
  app.add_option("--steps", steps, "increments per path");
  app.add_option("--seed", seed);
  app.add_option("--alpha", alpha, "two-sided level");
  app.add_option("--threads", threads, "0 = hardware concurrency");
  app.add_option("--csv", csv_path);
  app.add_option("--inc", inc_path, "C++ table include to regenerate");
  CLI11_PARSE(app, argc, argv);

  std::vector<double> mus;
  for (int k = 1; k <= 19; ++k) mus.push_back(0.05 * k);
  const auto values =
      favar::simulate_fluctuation_critical_values(mus, alpha, paths, steps, seed, threads);

  auto fmt = [](double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
  };

  std::ofstream csv(csv_path);
  csv << "# paths=" << paths << " steps=" << steps << " seed=" << seed
      << " alpha=" << alpha << '\n'
      << "mu,critical_value\n";
  for (std::size_t i = 0; i < mus.size(); ++i) {
    csv << fmt(mus[i]) << ',' << fmt(values[i]) << '\n';
    std::cout << "mu=" << mus[i] << " cv=" << values[i] << '\n';
  }

  if (!inc_path.empty()) {
    std::ofstream inc(inc_path);
    inc << "// Generated by tools/gen_fluctuation_table; do not edit.\n"
        << "// paths=" << paths << " steps=" << steps << " seed=" << seed
        << " alpha=" << alpha << "\n"
        << "constexpr CriticalValueEntry kFluctuationCriticalValues[] = {\n";
    for (std::size_t i = 0; i < mus.size(); ++i) {
      inc << "    {" << fmt(mus[i]) << ", " << fmt(values[i]) << "},\n";
    }
    inc << "};\n";
  }
  return 0;
}
