#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path presets(MFC_PRESET_DIR);

struct Result {
  int code;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mfc_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Result mfc(const std::string& args) {
  const auto log = fs::temp_directory_path() / "mfc_cli_test" / "last.log";
  fs::create_directories(log.parent_path());
  const std::string cmd = std::string("\"") + MFC_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

fs::path write_scenario(const fs::path& dir, const std::string& name, const std::string& text) {
  const auto p = dir / name;
  std::ofstream(p) << text;
  return p;
}

std::string preset(const std::string& f) { return "\"" + (presets / f).string() + "\""; }

}  // namespace

TEST_CASE("run writes trace and metrics") {
  const auto out = scratch("run");
  const auto r = mfc("run " + preset("buck-ipis.scn") + " --out " + out.string());
  INFO(r.output);
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "trace.csv"));
  CHECK(fs::exists(out / "metrics.txt"));
  CHECK(slurp(out / "metrics.txt").find("iae = ") == 0);
}

TEST_CASE("window of one sample is a validation failure") {
  const auto dir = scratch("window");
  auto text = slurp(presets / "lti-ipi.scn");
  text.replace(text.find("estimator.window_samples = 3"), 28, "estimator.window_samples = 1");
  const auto p = write_scenario(dir, "w1.scn", text);
  auto r = mfc("run " + p.string() + " --out " + (dir / "o").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("ESTIMATOR_WINDOW") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "o" / "trace.csv"));
  CHECK(mfc("validate " + p.string()).code == 2);
  CHECK(mfc("validate " + preset("lti-ipi.scn")).code == 0);
}

TEST_CASE("forced run records violations in the trace metadata") {
  const auto dir = scratch("force");
  auto text = slurp(presets / "lti-ipi.scn");
  text.replace(text.find("reference.max_slope = 1"), 23, "reference.max_slope = 0.5");
  text.replace(text.find("sim.duration = 20"), 17, "sim.duration = 3");
  const auto p = write_scenario(dir, "steep.scn", text);
  CHECK(mfc("run " + p.string() + " --out " + (dir / "o").string()).code == 2);
  const auto r = mfc("run " + p.string() + " --force --out " + (dir / "o").string());
  CHECK(r.code == 0);
  CHECK(slurp(dir / "o" / "trace.csv").find("# forced_violations: LIPSCHITZ_REFERENCE") != std::string::npos);
}

TEST_CASE("diverging i-PIS exits 3 with the step index") {
  const auto dir = scratch("diverge");
  auto text = slurp(presets / "buck-ipis.scn");
  text.replace(text.find("controller.sign = -1"), 20, "controller.sign = 1");
  text.replace(text.find("controller.Kp = 2000"), 20, "controller.Kp = 2e12");
  const auto p = write_scenario(dir, "boom.scn", text);
  const auto r = mfc("run " + p.string() + " --out " + (dir / "o").string());
  INFO(r.output);
  CHECK(r.code == 3);
  CHECK(r.output.find("divergence at step ") != std::string::npos);
}

TEST_CASE("configuration errors exit 1 and name the culprit") {
  const auto dir = scratch("config");
  auto r = mfc("run /no/such/file.scn --out " + dir.string());
  CHECK(r.code == 1);
  CHECK(r.output.find("/no/such/file.scn") != std::string::npos);

  const auto p = write_scenario(dir, "bad.scn", slurp(presets / "lti-ipi.scn") + "controller.turbo = 1\n");
  r = mfc("run " + p.string() + " --out " + dir.string());
  CHECK(r.code == 1);
  CHECK(r.output.find("controller.turbo") != std::string::npos);

  CHECK(mfc("").code == 1);
  CHECK(mfc("frobnicate").code == 1);
}

TEST_CASE("compare a scenario with itself") {
  const auto out = scratch("self");
  const auto r = mfc("compare " + preset("lti-ipi.scn") + " " + preset("lti-ipi.scn") + " --out " + out.string());
  CHECK(r.code == 0);
  for (const char* f : {"trace_a.csv", "trace_b.csv", "metrics_a.txt", "metrics_b.txt", "compare.txt"})
    CHECK(fs::exists(out / f));
  CHECK(slurp(out / "compare.txt").find("iae_ratio 1\n") != std::string::npos);
  CHECK(slurp(out / "metrics_a.txt") == slurp(out / "metrics_b.txt"));
}

TEST_CASE("compare refuses mismatched grids") {
  const auto out = scratch("grid");
  CHECK(mfc("compare " + preset("lti-ipi.scn") + " " + preset("buck-ipi.scn") + " --out " + out.string()).code == 1);
}

TEST_CASE("lti-ageing preset ranks i-PI ahead of PID") {
  const auto out = scratch("ageing");
  CHECK(mfc("preset lti-ageing --out " + out.string()).code == 0);
  std::istringstream in(slurp(out / "compare.txt"));
  std::string line, key;
  double a = 0, b = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    ls >> key;
    if (key == "iae") ls >> a >> b;
  }
  CHECK(a > 0.0);
  CHECK(a < b);
}

TEST_CASE("presets dispatch") {
  const auto out = scratch("presets");
  auto r = mfc("preset nope --out " + out.string());
  CHECK(r.code == 1);
  CHECK(r.output.find("buck-ipis-load") != std::string::npos);

  CHECK(mfc("preset energy-demo --out " + out.string()).code == 0);
  const auto csv = slurp(out / "energy.csv");
  CHECK(csv.rfind("step,t,x,v,energy,method\n", 0) == 0);
  for (const char* m : {",symplectic\n", ",explicit\n", ",rk4\n"}) CHECK(csv.find(m) != std::string::npos);
}

TEST_CASE("energy-demo flags") {
  const auto out = scratch("energy");
  CHECK(mfc("energy-demo --h 0.1 --steps 5 --m 2 --k 3 --method explicit --out " + out.string()).code == 0);
  const auto csv = slurp(out / "energy.csv");
  CHECK(csv.find(",rk4") == std::string::npos);
  CHECK(csv.find("5,0.5,") != std::string::npos);
  CHECK(mfc("energy-demo --method leapfrog --out " + out.string()).code == 1);
}

TEST_CASE("outputs are byte-stable and the seed flag overrides the scenario") {
  const auto dir = scratch("stable");
  auto text = slurp(presets / "buck-ipis.scn");
  text.replace(text.find("sim.duration = 0.02"), 19, "sim.duration = 0.003\nnoise.amplitude = 0.01");
  const auto p = write_scenario(dir, "noisy.scn", text);
  CHECK(mfc("run " + p.string() + " --out " + (dir / "a").string()).code == 0);
  CHECK(mfc("run " + p.string() + " --out " + (dir / "b").string()).code == 0);
  CHECK(mfc("run " + p.string() + " --seed 77 --out " + (dir / "c").string()).code == 0);
  const auto a = slurp(dir / "a" / "trace.csv");
  CHECK(a == slurp(dir / "b" / "trace.csv"));
  const auto c = slurp(dir / "c" / "trace.csv");
  CHECK(c != a);
  CHECK(c.find("# seed: 77\n") != std::string::npos);
}
