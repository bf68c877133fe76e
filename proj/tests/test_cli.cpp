// End-to-end checks of the purcellsim executable: argument handling, exit
// codes, CSV/JSON outputs, determinism and the full reproduction run.
// The binary path and the bundled configuration come from the build system.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

RunResult run(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / "purcellsim_cli_stdout.txt";
  const std::string command = std::string(PURCELLSIM_BIN) + " " + args + " > " + out.string() + " 2>&1";
  const int raw = std::system(command.c_str());
  std::ifstream in(out);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return {WEXITSTATUS(raw), buffer.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream split(line);
    std::vector<double> row;
    std::string cell;
    bool numeric = true;
    while (std::getline(split, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (...) {
        numeric = false;
        break;
      }
    }
    if (numeric && !row.empty()) rows.push_back(row);
  }
  return rows;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string kConfig = PURCELLSIM_CONFIG;

}  // namespace

TEST_CASE("transitions: CSV with metadata comment, header, and the 3 mT table") {
  const fs::path dir = fresh_dir("ps_cli_transitions");
  const RunResult result = run("transitions --config " + kConfig + " --out " + dir.string());
  CHECK(result.exit_code == 0);

  const std::string text = slurp(dir / "transitions.csv");
  CHECK(text.rfind("# purcellsim", 0) == 0);
  CHECK(text.find("config_hash=") != std::string::npos);
  CHECK(text.find("fromF,frommF,toF,tomF,frequency_Hz,matrix_element,dfdB_Hz_per_T,branch") !=
        std::string::npos);

  const auto rows = read_csv(dir / "transitions.csv");
  REQUIRE(rows.size() == 18);
  CHECK(rows[0][4] == doctest::Approx(7.300e9).epsilon(2e-4));
  CHECK(rows[0][5] == doctest::Approx(0.474).epsilon(5e-3));
  CHECK(rows[0][6] == doctest::Approx(-25.1e9).epsilon(5e-3));
}

TEST_CASE("transitions: threshold flag keeps ten rows, zero-field collapses to 5A") {
  const fs::path dir = fresh_dir("ps_cli_threshold");
  CHECK(run("transitions --config " + kConfig + " --out " + dir.string() +
            " --min-matrix-element 0.25")
            .exit_code == 0);
  CHECK(read_csv(dir / "transitions.csv").size() == 10);

  CHECK(run("transitions --config " + kConfig + " --out " + dir.string() + " --b0-T 0").exit_code ==
        0);
  for (const auto& row : read_csv(dir / "transitions.csv")) {
    CHECK(row[4] == doctest::Approx(5.0 * 1.4752e9).epsilon(1e-9));
  }
}

TEST_CASE("purcell: delta = 0 equals T1(0), delta = kappa is five times slower") {
  const fs::path dir = fresh_dir("ps_cli_purcell");
  REQUIRE(run("purcell --config " + kConfig + " --out " + dir.string()).exit_code == 0);
  const auto rows = read_csv(dir / "purcell.csv");
  REQUIRE(!rows.empty());
  double at_zero = 0.0, at_kappa = 0.0, asymptote = 0.0;
  const double kappa = 7.305e9 / 89085.0;
  for (const auto& row : rows) {
    if (std::abs(row[0]) < 1.0) at_zero = row[1];
    if (std::abs(row[0] - 82000.0) < 60e3) at_kappa = row[1];
    asymptote = std::max(asymptote, row[1]);
  }
  // gamma_nr is part of the sweep model, so T1(0) sits just under 1.68 s
  CHECK(at_zero == doctest::Approx(1.0 / (1.0 / 1.68 + 6.25e-4)).epsilon(1e-9));
  CHECK(at_kappa > at_zero);
  CHECK(asymptote > 1000.0);
  (void)kappa;
}

TEST_CASE("simulate: rabi CSV starts at zero echo and oscillates") {
  const fs::path dir = fresh_dir("ps_cli_rabi");
  REQUIRE(run("simulate --protocol rabi --config " + kConfig + " --out " + dir.string()).exit_code ==
          0);
  const auto rows = read_csv(dir / "rabi.csv");
  REQUIRE(rows.size() == 81);
  CHECK(rows[0][1] == doctest::Approx(0.0));
  double peak = 0.0;
  for (const auto& row : rows) peak = std::max(peak, row[1]);
  CHECK(peak > 0.9);
}

TEST_CASE("simulate: saturation recovery produces a rising decay curve") {
  const fs::path dir = fresh_dir("ps_cli_saturation");
  REQUIRE(run("simulate --protocol saturation --config " + kConfig + " --out " + dir.string())
              .exit_code == 0);
  const auto rows = read_csv(dir / "saturation.csv");
  REQUIRE(rows.size() == 25);
  CHECK(rows.front()[1] < rows.back()[1]);  // recovery toward +1
  CHECK(rows.back()[1] > 0.9);
}

TEST_CASE("fit: exponential model on a synthetic CSV prints a JSON report") {
  const fs::path dir = fresh_dir("ps_cli_fit");
  const fs::path input = dir / "decay.csv";
  {
    std::ofstream out(input);
    out << "time_s,A_Q\n";
    for (int i = 0; i < 30; ++i) {
      const double t = 0.02 + i * 0.1;
      out << t << "," << 1.0 - 2.0 * std::exp(-t / 0.35) << "\n";
    }
  }
  const RunResult result =
      run("fit --model exp --input " + input.string() + " --out " + dir.string());
  CHECK(result.exit_code == 0);
  CHECK(result.stdout_text.find("\"T1\"") != std::string::npos);
  CHECK(result.stdout_text.find("\"converged\": true") != std::string::npos);
  const std::string report = slurp(dir / "fit_exp.json");
  CHECK(report.find("0.35") != std::string::npos);
}

TEST_CASE("fit: purcell model requires its fixed parameters") {
  const fs::path dir = fresh_dir("ps_cli_fit_purcell");
  const fs::path input = dir / "t1.csv";
  {
    std::ofstream out(input);
    out << "delta_Hz,T1_s\n";
    for (int i = -10; i <= 11; ++i) {
      const double d = i * 5e5;
      const double purcell = 1.0 / (1.68 * (1.0 + 4.0 * d * d / (82e3 * 82e3)));
      out << d << "," << 1.0 / (purcell + 1.0 / 1600.0) << "\n";
    }
  }
  CHECK(run("fit --model purcell --input " + input.string()).exit_code == 1);
  const RunResult result = run("fit --model purcell --input " + input.string() +
                               " --t1-resonant-s 1.68 --kappa-Hz 82000 --out " + dir.string());
  CHECK(result.exit_code == 0);
  CHECK(result.stdout_text.find("gamma_nr") != std::string::npos);
}

TEST_CASE("validation failures exit with code 1 and name the problem") {
  const fs::path dir = fresh_dir("ps_cli_errors");

  // missing section: strip the purcell section out of the config
  const std::string text = slurp(kConfig);
  const fs::path cut = dir / "no_purcell.json";
  {
    std::string edited = text;
    const size_t at = edited.find("\"purcell\"");
    REQUIRE(at != std::string::npos);
    const size_t end = edited.find("},", at);
    edited.erase(at, end - at + 2);
    std::ofstream out(cut);
    out << edited;
  }
  const RunResult missing = run("purcell --config " + cut.string() + " --out " + dir.string());
  CHECK(missing.exit_code == 1);
  CHECK(missing.stdout_text.find("purcell") != std::string::npos);

  // unknown key
  const fs::path unknown = dir / "unknown.json";
  {
    std::ofstream out(unknown);
    out << R"({"spin_system": {"S": 0.5, "I": 4.5, "A_Hz": 1e9, "gamma_e_Hz_per_T": 2.8e10,
               "gamma_n_Hz_per_T": 7e6, "bogus": 1}})";
  }
  const RunResult bogus =
      run("transitions --config " + unknown.string() + " --out " + dir.string() + " --b0-T 0.003");
  CHECK(bogus.exit_code == 1);
  CHECK(bogus.stdout_text.find("bogus") != std::string::npos);

  // absent config file
  CHECK(run("transitions --config /nonexistent.json --out " + dir.string()).exit_code == 1);
  // unknown protocol
  CHECK(run("simulate --protocol nonsense --config " + kConfig + " --out " + dir.string())
            .exit_code == 1);
}

TEST_CASE("reproduce: full run under a minute, seeded bytes identical") {
  const fs::path dir_a = fresh_dir("ps_cli_repro_a");
  const auto started = std::chrono::steady_clock::now();
  const RunResult first = run("reproduce --config " + kConfig + " --out " + dir_a.string() +
                              " --seed 7");
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  REQUIRE(first.exit_code == 0);
  CHECK(elapsed < 60.0);

  const std::vector<std::string> expected = {
      "full_transition_table.csv", "fieldsweep_A.csv",    "fieldsweep_B.csv",
      "rabi_oscillations.csv",  "rabi_fit.json",          "inversion_recovery_narrowband.csv",
      "inversion_narrowband_fit.json", "inversion_recovery_broadband.csv", "inversion_broadband_fit.json",
      "t1_decay_0.csv",         "t1_vs_delta.csv",        "gamma_nr_fit.json",
      "saturation_recovery_swept.csv", "saturation_recovery_plain.csv", "polarization_scan_swept.csv"};
  for (const std::string& name : expected) {
    CAPTURE(name);
    CHECK(fs::exists(dir_a / name));
  }

  const fs::path dir_b = fresh_dir("ps_cli_repro_b");
  REQUIRE(run("reproduce --config " + kConfig + " --out " + dir_b.string() + " --seed 7")
              .exit_code == 0);
  for (const std::string& name : expected) {
    CAPTURE(name);
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
  }

  // the gamma_nr closure lands near 1600 s
  const std::string fit = slurp(dir_a / "gamma_nr_fit.json");
  const size_t at = fit.find("gamma_nr_inverse_s");
  REQUIRE(at != std::string::npos);
  const double inverse = std::stod(fit.substr(fit.find(':', at) + 1));
  CHECK(inverse == doctest::Approx(1600.0).epsilon(0.05));
}
