#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "CLI11.hpp"
#include "json.hpp"

#include "mpoforge/config.hpp"
#include "mpoforge/expfit.hpp"
#include "mpoforge/gate_mpo.hpp"
#include "mpoforge/ham_mpo.hpp"
#include "mpoforge/pepo.hpp"
#include "mpoforge/state_io.hpp"
#include "mpoforge/thermo.hpp"
#include "mpoforge/umps.hpp"

namespace {

using json = nlohmann::json;
using namespace mpoforge;

// ---------------------------------------------------------------------------
// shared plumbing

class Timer {
public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  /// Wall time as a string field: keeps every numeric JSON field bit-identical
  /// across reruns while still recording the cost.
  std::string str() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2fs", seconds());
    return buf;
  }

private:
  std::chrono::steady_clock::time_point start_;
};

config::Settings resolve_settings(const std::string& config_path,
                                  const std::vector<std::string>& overrides) {
  config::Settings s;
  if (!config_path.empty()) s = config::parse_file(config_path);
  for (const auto& kv : overrides) config::apply_override(s, kv);
  return s;
}

std::string out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

json vec_json(const std::vector<double>& v) { return json(v); }

/// TFI ground energy per site, e(B) = -(1/pi) Int_0^pi sqrt(1+B^2-2B cos k) dk
/// (free-fermion closed form), by composite Simpson on the smooth integrand.
double tfi_reference(double b) {
  const int n = 1 << 16;  // h^4 ~ 5e-19: far below the 1e-12 we rely on
  const double h = kPi / n;
  auto f = [&](double k) { return std::sqrt(1.0 + b * b - 2.0 * b * std::cos(k)); };
  double acc = f(0.0) + f(kPi);
  for (int i = 1; i < n; ++i) acc += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return -(acc * h / 3.0) / kPi;
}

constexpr double kHeisenbergReference = -1.7725887222397811;  // 1 - 4 ln 2

// ---------------------------------------------------------------------------
// ground-state

int cmd_ground_state(const config::Settings& cfg, const std::string& outdir) {
  const std::string model_name = cfg.get("model", "tfi");
  gate::Model model;
  if (model_name == "tfi")
    model = gate::Model::Tfi;
  else if (model_name == "heisenberg")
    model = gate::Model::Heisenberg;
  else
    throw Error("ground-state: unknown model '" + model_name + "'");
  const double field = cfg.get_double("field", 1.0);
  const int d_max = cfg.get_int("d", 16);
  const double eps_final = cfg.get_double("eps_final", 2.5e-3);

  std::vector<imps::StageConfig> schedule;
  if (cfg.has("schedule")) {
    const auto eps = cfg.get_list("schedule", {});
    const auto sweeps = cfg.get_list("sweeps", {});
    const auto tols = cfg.get_list("tols", {});
    for (std::size_t i = 0; i < eps.size(); ++i) {
      imps::StageConfig st;
      st.epsilon = eps[i];
      st.max_sweeps = sweeps.empty()
                          ? 2000
                          : static_cast<int>(sweeps[std::min(i, sweeps.size() - 1)]);
      st.tol = tols.empty() ? 0.0 : tols[std::min(i, tols.size() - 1)];
      schedule.push_back(st);
    }
  } else {
    schedule = imps::default_schedule(eps_final);
  }

  const std::string trace_path = out_path(outdir, cfg.get("trace_out", "trace.csv"));
  const std::string state_path = out_path(outdir, cfg.get("state_out", "state.mps"));
  const std::string result_path = out_path(outdir, cfg.get("result_out", "result.json"));

  std::ofstream trace(trace_path);
  if (!trace) throw Error("cannot write '" + trace_path + "'");
  trace << "sweep,epsilon,bond,energy,discarded_weight\n";
  auto on_sweep = [&](const imps::SweepRecord& r) {
    char line[160];
    std::snprintf(line, sizeof(line), "%d,%.17g,%d,%.17g,%.17g\n", r.sweep, r.epsilon, r.bond,
                  r.energy, r.discarded);
    trace << line;
  };

  Timer timer;
  imps::GroundStateResult run = imps::ground_state_search(model, field, d_max, schedule, on_sweep);
  trace.close();
  io::save_state(state_path, run.state);

  json rec;
  rec["command"] = "ground-state";
  json inputs;
  inputs["model"] = model_name;
  inputs["field"] = field;
  inputs["d"] = d_max;
  inputs["eps_final"] = eps_final;
  {
    std::vector<double> eps, caps, tols;
    for (const auto& st : schedule) {
      eps.push_back(st.epsilon);
      caps.push_back(st.max_sweeps);
      tols.push_back(st.tol);
    }
    inputs["schedule"] = vec_json(eps);
    inputs["sweeps"] = vec_json(caps);
    inputs["tols"] = vec_json(tols);
  }
  rec["inputs"] = inputs;
  rec["energy"] = run.energy;
  rec["energy_measured"] = run.energy_measured;
  rec["extrapolated"] = run.extrapolated;
  rec["converged"] = run.converged;
  rec["total_sweeps"] = run.total_sweeps;
  rec["diagnostic"] = run.diagnostic;
  json stages = json::array();
  for (const auto& st : run.stages) {
    json s;
    s["epsilon"] = st.epsilon;
    s["energy"] = st.energy;
    s["energy_raw"] = st.energy_raw;
    s["sweeps"] = st.sweeps;
    s["converged"] = st.converged;
    stages.push_back(s);
  }
  rec["stages"] = stages;
  const double ref = model == gate::Model::Tfi ? tfi_reference(field) : kHeisenbergReference;
  rec["reference"] = {{"value", ref}, {"relative_error", (run.energy - ref) / std::abs(ref)}};
  rec["files"] = {{"trace", cfg.get("trace_out", "trace.csv")},
                  {"state", cfg.get("state_out", "state.mps")}};
  rec["wall_time"] = timer.str();
  write_json(result_path, rec);

  std::printf("ground-state %s D=%d: e = %.12g (measured %.12g), rel err %.3e, %d sweeps, %s\n",
              model_name.c_str(), d_max, run.energy, run.energy_measured,
              (run.energy - ref) / std::abs(ref), run.total_sweeps, timer.str().c_str());
  if (!run.converged) {
    std::fprintf(stderr, "ground-state: not converged: %s\n", run.diagnostic.c_str());
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// expfit

Vec read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("expfit: cannot open '" + path + "'");
  std::vector<double> vals;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = line;
    const std::size_t hash = body.find('#');
    if (hash != std::string::npos) body = body.substr(0, hash);
    if (body.find_first_not_of(" \t\r,") == std::string::npos) continue;
    std::istringstream ss(body);
    std::string kf, ff;
    if (!std::getline(ss, kf, ',') || !std::getline(ss, ff))
      throw Error("expfit: line " + std::to_string(lineno) + ": expected 'k,f'");
    int k = 0;
    double f = 0;
    try {
      k = std::stoi(kf);
      f = std::stod(ff);
    } catch (const std::exception&) {
      if (lineno == 1) continue;  // header row
      throw Error("expfit: line " + std::to_string(lineno) + ": malformed row '" + body + "'");
    }
    if (k != static_cast<int>(vals.size()) + 1)
      throw Error("expfit: rows must run k = 1..N contiguously, got k=" + std::to_string(k));
    vals.push_back(f);
  }
  if (vals.size() < 4) throw Error("expfit: need at least 4 samples");
  return Eigen::Map<const Vec>(vals.data(), static_cast<long>(vals.size()));
}

int cmd_expfit(const config::Settings& cfg, const std::string& outdir) {
  const double p = cfg.get_double("p", 3.0);
  const int n = cfg.get_int("n", 10);
  const int n_fit = cfg.get_int("n_fit", 1000);
  const std::string method_name = cfg.get("method", "qr");
  const std::string input = cfg.get("input", "");
  expfit::PencilMethod method;
  if (method_name == "qr")
    method = expfit::PencilMethod::Qr;
  else if (method_name == "direct")
    method = expfit::PencilMethod::Direct;
  else
    throw Error("expfit: unknown method '" + method_name + "'");

  Vec f;
  if (!input.empty()) {
    f = read_samples_csv(input);
  } else {
    f.resize(n_fit);
    for (int r = 1; r <= n_fit; ++r) f(r - 1) = std::pow(static_cast<double>(r), -p);
  }

  Timer timer;
  const expfit::ExpSumFit fit = expfit::fit_exp_sum(f, n, method);

  const std::string curve_path = out_path(outdir, cfg.get("curve_out", "fit.csv"));
  {
    std::ofstream curve(curve_path);
    curve << "r,f,fit,abs_error\n";
    for (int r = 1; r <= f.size(); ++r) {
      const double fr = expfit::evaluate(fit, r);
      char line[160];
      std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g\n", r, f(r - 1), fr,
                    std::abs(f(r - 1) - fr));
      curve << line;
    }
  }

  json rec;
  rec["command"] = "expfit";
  rec["inputs"] = {{"p", p},
                   {"n", n},
                   {"n_fit", static_cast<int>(f.size())},
                   {"method", method_name},
                   {"input", input}};
  json expo = json::array(), wts = json::array();
  for (long c = 0; c < fit.exponents.size(); ++c) {
    expo.push_back({{"re", fit.exponents(c).real()}, {"im", fit.exponents(c).imag()}});
    wts.push_back({{"re", fit.weights(c).real()}, {"im", fit.weights(c).imag()}});
  }
  rec["exponents"] = expo;
  rec["weights"] = wts;
  rec["l1_cost"] = fit.l1_cost;
  rec["max_abs_dev"] = fit.max_abs_dev;
  rec["requested_terms"] = fit.requested_terms;
  rec["rank_deficient"] = fit.rank_deficient;
  rec["diagnostic"] = fit.diagnostic;
  rec["files"] = {{"curve", cfg.get("curve_out", "fit.csv")}};
  rec["wall_time"] = timer.str();
  write_json(out_path(outdir, cfg.get("result_out", "result.json")), rec);

  std::printf("expfit n=%ld: l1 cost %.3e, max dev %.3e%s\n",
              static_cast<long>(fit.exponents.size()), fit.l1_cost, fit.max_abs_dev,
              fit.rank_deficient ? " (rank deficient)" : "");
  return 0;
}

// ---------------------------------------------------------------------------
// longrange

Mat field_from(const config::Settings& cfg) {
  return cfg.get_double("field_x", 0.0) * gate::pauli_x() +
         cfg.get_double("field_z", 0.0) * gate::pauli_z();
}

ham::HamiltonianMPO mpo_from(const config::Settings& cfg) {
  const std::string kind = cfg.get("mpo", "nn");
  const Mat field = field_from(cfg);
  if (kind == "nn") {
    const auto mu = cfg.get_list("mu", {0.0, 0.0, 1.0});
    if (mu.size() != 3) throw Error("longrange: nn needs mu as three values");
    return ham::build_nn_mpo({mu[0], mu[1], mu[2]}, field);
  }
  if (kind == "ising") {
    const auto mu = cfg.get_list("mu", {1.0});
    return ham::build_ising_mpo(mu.at(0), field);
  }
  if (kind == "expdecay") {
    const auto mu = cfg.get_list("mu", {0.0, 0.0, 1.0});
    const auto lam = cfg.get_list("lambda", {0.5, 0.5, 0.5});
    if (mu.size() != 3 || lam.size() != 3)
      throw Error("longrange: expdecay needs mu and lambda as three values");
    return ham::build_expdecay_mpo({mu[0], mu[1], mu[2]}, {lam[0], lam[1], lam[2]}, field);
  }
  if (kind == "powerlaw") {
    const std::string opname = cfg.get("op", "z");
    const Mat op = opname == "x" ? gate::pauli_x()
                 : opname == "z" ? gate::pauli_z()
                                 : Mat();
    if (!op.size()) throw Error("longrange: powerlaw op must be x or z");
    return ham::build_powerlaw_mpo(cfg.get_double("p", 3.0), cfg.get_int("n", 6),
                                   cfg.get_int("n_fit", 200), op);
  }
  throw Error("longrange: unknown mpo '" + kind + "'");
}

imps::UniformMPS state_from(const config::Settings& cfg) {
  const std::string path = cfg.get("state", "");
  if (!path.empty()) {
    io::LoadedState ls = io::load_state(path);
    if (ls.kind != ScalarKind::Real)
      throw Error("longrange: thermodynamic evaluation needs a real-symmetric state");
    return imps::normalize(ls.real);
  }
  const std::string kind = cfg.get("state_kind", "product0");
  if (kind == "product0") {
    Vec amp(2);
    amp << 1, 0;
    return imps::normalize(imps::product_state(amp));
  }
  if (kind == "plus") {
    Vec amp(2);
    amp << 1, 1;
    return imps::normalize(imps::product_state(amp));
  }
  if (kind == "random") {
    const int d = cfg.get_int("state_d", 2);
    std::mt19937 rng(static_cast<unsigned>(cfg.get_int("seed", 1)));
    std::normal_distribution<double> g;
    imps::UniformMPS s;
    for (int i = 0; i < 2; ++i) {
      Mat a(d, d);
      for (int r = 0; r < d; ++r)
        for (int c = r; c < d; ++c) a(r, c) = a(c, r) = 0.3 * g(rng);
      if (i == 0) a += Mat::Identity(d, d);
      s.a.push_back(a);
    }
    return imps::normalize(s);
  }
  throw Error("longrange: unknown state_kind '" + kind + "'");
}

int cmd_longrange(const config::Settings& cfg, const std::string& outdir) {
  Timer timer;
  const ham::HamiltonianMPO h = mpo_from(cfg);
  const imps::UniformMPS s = state_from(cfg);
  const thermo::JordanEvaluation ev = thermo::energy_density(s, h);

  json rec;
  rec["command"] = "longrange";
  json inputs;
  inputs["mpo"] = cfg.get("mpo", "nn");
  inputs["mu"] = vec_json(cfg.get_list("mu", {0.0, 0.0, 1.0}));
  inputs["lambda"] = vec_json(cfg.get_list("lambda", {0.5, 0.5, 0.5}));
  inputs["field_x"] = cfg.get_double("field_x", 0.0);
  inputs["field_z"] = cfg.get_double("field_z", 0.0);
  inputs["state"] = cfg.get("state", "");
  inputs["state_kind"] = cfg.get("state_kind", "product0");
  inputs["state_d"] = s.bond();
  inputs["seed"] = cfg.get_int("seed", 1);
  rec["inputs"] = inputs;
  rec["energy"] = ev.energy;
  rec["d0"] = ev.d0;
  rec["dim"] = ev.dim;
  rec["complex_path"] = ev.complex_path;
  rec["chain_residual"] = ev.chain_residual;
  rec["marker_residual"] = ev.marker_residual;
  rec["gauge_overlap"] = ev.gauge_overlap;
  rec["pairing"] = {{"re", ev.pairing.real()}, {"im", ev.pairing.imag()}};

  const std::string kind = cfg.get("mpo", "nn");
  if (kind == "nn" || kind == "ising") {
    // cross-module check surface: same energy through the E0 fixed point
    Mat h2;
    if (kind == "nn") {
      const auto mu = cfg.get_list("mu", {0.0, 0.0, 1.0});
      const Mat sig[3] = {gate::pauli_x(), gate::pauli_yt(), gate::pauli_z()};
      const double sgn[3] = {1.0, -1.0, 1.0};  // YY = -(Yt Yt)
      h2 = Mat::Zero(4, 4);
      for (int a = 0; a < 3; ++a) {
        Mat k4(4, 4);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            k4.block(2 * i, 2 * j, 2, 2) = sig[a](i, j) * sig[a];
        h2 += sgn[a] * mu[a] * k4;
      }
    } else {
      const double mu = cfg.get_list("mu", {1.0}).at(0);
      const Mat z = gate::pauli_z();
      h2 = Mat::Zero(4, 4);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) h2.block(2 * i, 2 * j, 2, 2) = mu * z(i, j) * z;
    }
    rec["measured_bond_energy"] = imps::measure_bond_energy(s, h2, field_from(cfg));
  }

  if (cfg.get_bool("variance", true)) {
    const std::string shift_key = cfg.get("variance_shift", "e");
    const double shift = shift_key == "e" ? ev.energy : cfg.get_double("variance_shift", 0.0);
    const thermo::VarianceResult v = thermo::variance_density(s, h, shift);
    rec["variance"] = {{"c0", v.c0},
                       {"c1", v.c1},
                       {"c2", v.c2},
                       {"antisym_overlap", v.antisym_overlap},
                       {"lambda_shift", shift}};
  }

  const int window = cfg.get_int("window", 0);
  if (window > 0) {
    if (window < 3) throw Error("longrange: window must be >= 3");
    const double w0 = thermo::finite_window_expectation(s, h, window - 2);
    const double w1 = thermo::finite_window_expectation(s, h, window - 1);
    const double w2 = thermo::finite_window_expectation(s, h, window);
    const double w3 = thermo::finite_window_expectation(s, h, window + 1);
    const double d0 = w1 - w0, d1 = w2 - w1, d2 = w3 - w2;
    double slope_acc = d2;
    const double denom = d2 - 2 * d1 + d0;
    if (std::abs(denom) > 1e-14 * std::max(1.0, std::abs(d2)))
      slope_acc = d2 - (d2 - d1) * (d2 - d1) / denom;
    rec["window"] = {{"n", window}, {"value", w2}, {"slope", d2}, {"slope_aitken", slope_acc}};
  }

  rec["wall_time"] = timer.str();
  write_json(out_path(outdir, cfg.get("result_out", "result.json")), rec);
  std::printf("longrange %s: e = %.12g (chain residual %.1e)\n", kind.c_str(), ev.energy,
              ev.chain_residual);
  return 0;
}

// ---------------------------------------------------------------------------
// verify

Mat op_at(const Mat& op, int site, int n) {
  Mat acc = Mat::Identity(1, 1);
  for (int i = 0; i < n; ++i) {
    const Mat& f = i == site ? op : Mat(Mat::Identity(2, 2));
    Mat next(acc.rows() * f.rows(), acc.cols() * f.cols());
    for (int r = 0; r < acc.rows(); ++r)
      for (int c = 0; c < acc.cols(); ++c) next.block(r * f.rows(), c * f.cols(), f.rows(), f.cols()) = acc(r, c) * f;
    acc = next;
  }
  return acc;
}

struct Verifier {
  bool full = false;
  bool inject_gate_fault = false;
  json checks = json::array();
  bool all_pass = true;

  void record(const std::string& name, bool pass, const std::string& detail) {
    checks.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
    all_pass = all_pass && pass;
    std::printf("%s %s (%s)\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  }

  void record_bound(const std::string& name, double value, double bound) {
    char detail[96];
    std::snprintf(detail, sizeof(detail), "%.3e <= %.1e", value, bound);
    record(name, value <= bound, detail);
  }

  void gates() {
    const int n_max = full ? 8 : 6;
    double worst = 0;
    for (double eps : {0.01, 0.1, 0.5, 1.0}) {
      struct Case {
        gate::GateMPO g;
        Mat op;
        double sign;
      };
      std::vector<Case> cases;
      cases.push_back({gate::build_zz_gate(eps), gate::pauli_z(), 1.0});
      cases.push_back({gate::build_xx_gate(eps), gate::pauli_x(), 1.0});
      // exp(-eps YY) = exp(+eps Yt Yt), both legs real
      cases.push_back({gate::build_tilde_yy_gate(eps), gate::pauli_yt(), 1.0});
      if (inject_gate_fault)
        for (auto& c : cases) c.g.site[1] = -c.g.site[1];
      for (const auto& c : cases)
        for (int n = 2; n <= n_max; ++n) {
          Mat gen = Mat::Zero(1 << n, 1 << n);
          for (int i = 0; i < n; ++i)
            gen += c.sign * eps * op_at(c.op, i, n) * op_at(c.op, (i + 1) % n, n);
          const Mat dense = gen.exp();
          const Mat built = gate::materialize_ring(c.g, n);
          worst = std::max(worst, (built - dense).cwiseAbs().maxCoeff());
        }
      // bond-1 on-site factor
      const Mat fx = 0.7 * gate::pauli_x();
      const gate::GateMPO lf = gate::build_local_field_gate(eps, fx);
      for (int n = 2; n <= std::min(n_max, 5); ++n) {
        Mat gen = Mat::Zero(1 << n, 1 << n);
        for (int i = 0; i < n; ++i) gen += eps * op_at(fx, i, n);
        worst = std::max(worst, (gate::materialize_ring(lf, n) - gen.exp()).cwiseAbs().maxCoeff());
      }
    }
    record_bound("gate-mpo-exactness", worst, 1e-12);
  }

  void pepos() {
    double worst = 0;
    const std::vector<std::pair<int, int>> shapes =
        full ? std::vector<std::pair<int, int>>{{2, 2}, {2, 3}, {3, 3}}
             : std::vector<std::pair<int, int>>{{2, 2}, {2, 3}};
    for (double eps : {0.1, 0.5})
      for (auto [rows, cols] : shapes) {
        const pepo::PepoTensor t = pepo::build_zz_pepo(eps);
        const Mat built = pepo::materialize_lattice(t, rows, cols);
        // ordered product of bond factors exp(eps Z Z) over the open grid
        const int n = rows * cols;
        Mat dense = Mat::Identity(1 << n, 1 << n);
        const double ch = std::cosh(eps), sh = std::sinh(eps);
        auto bond = [&](int i, int j) {
          dense = (ch * Mat::Identity(1 << n, 1 << n) +
                   sh * op_at(gate::pauli_z(), i, n) * op_at(gate::pauli_z(), j, n)) *
                  dense;
        };
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) bond(r * cols + c, r * cols + c + 1);
            if (r + 1 < rows) bond(r * cols + c, (r + 1) * cols + c);
          }
        worst = std::max(worst, (built - dense).cwiseAbs().maxCoeff());
      }
    record_bound("pepo-zz-exactness", worst, 1e-12);

    // classical Ising ln Z vs direct enumeration
    double worst_z = 0;
    for (auto [rows, cols] : {std::pair<int, int>{2, 2}, {3, 3}}) {
      const double z = pepo::classical_ising_log_partition(rows, cols, 0.3);
      const int n = rows * cols;
      double zsum = 0;
      for (int conf = 0; conf < (1 << n); ++conf) {
        double e = 0;
        auto spin = [&](int i) { return (conf >> i) & 1 ? -1.0 : 1.0; };
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) e += spin(r * cols + c) * spin(r * cols + c + 1);
            if (r + 1 < rows) e += spin(r * cols + c) * spin((r + 1) * cols + c);
          }
        zsum += std::exp(0.3 * e);
      }
      worst_z = std::max(worst_z, std::abs(z - std::log(zsum)));
    }
    record_bound("pepo-ising-lnz", worst_z, 1e-10);

    if (full) {
      // 4x4 at the critical coupling vs a column-transfer oracle
      const int rows = 4, cols = 4;
      const double beta = 0.5 * std::log(1.0 + std::sqrt(2.0));
      const double z = pepo::classical_ising_log_partition(rows, cols, beta);
      const int nr = 1 << rows;
      auto col_energy = [&](int s) {
        double e = 0;
        for (int r = 0; r + 1 < rows; ++r)
          e += ((s >> r) & 1 ? -1.0 : 1.0) * ((s >> (r + 1)) & 1 ? -1.0 : 1.0);
        return e;
      };
      auto cross_energy = [&](int a, int b) {
        double e = 0;
        for (int r = 0; r < rows; ++r)
          e += ((a >> r) & 1 ? -1.0 : 1.0) * ((b >> r) & 1 ? -1.0 : 1.0);
        return e;
      };
      Vec w(nr);
      for (int s = 0; s < nr; ++s) w(s) = std::exp(beta * col_energy(s));
      double log_scale = 0;
      for (int c = 1; c < cols; ++c) {
        Vec next = Vec::Zero(nr);
        for (int b = 0; b < nr; ++b)
          for (int a = 0; a < nr; ++a)
            next(b) += w(a) * std::exp(beta * (cross_energy(a, b) + col_energy(b)));
        const double m = next.cwiseAbs().maxCoeff();
        log_scale += std::log(m);
        w = next / m;
      }
      const double lnz = std::log(w.sum()) + log_scale;
      record_bound("pepo-ising-lnz-4x4",
                   std::abs(z - lnz) / std::abs(lnz), 1e-10);
    }
  }

  void hams() {
    const int n_max = full ? 8 : 6;
    const Mat field = 0.3 * gate::pauli_x() + 0.1 * gate::pauli_z();
    const Mat sig[3] = {gate::pauli_x(), gate::pauli_yt(), gate::pauli_z()};
    const double sgn[3] = {1.0, -1.0, 1.0};
    double worst = 0;
    for (int n = 2; n <= n_max; ++n) {
      {
        const std::array<double, 3> mu{0.7, -0.4, 1.1};
        const ham::HamiltonianMPO h = ham::build_nn_mpo(mu, field);
        Mat dense = Mat::Zero(1 << n, 1 << n);
        for (int i = 0; i + 1 < n; ++i)
          for (int a = 0; a < 3; ++a)
            dense += sgn[a] * mu[a] * op_at(sig[a], i, n) * op_at(sig[a], i + 1, n);
        for (int i = 0; i < n; ++i) dense += op_at(field, i, n);
        worst = std::max(worst, (ham::materialize_finite(h, n) - dense).cwiseAbs().maxCoeff());
      }
      {
        const std::array<double, 3> mu{0.5, 0.0, 1.0};
        const std::array<double, 3> lam{0.6, 0.5, 0.7};
        const ham::HamiltonianMPO h = ham::build_expdecay_mpo(mu, lam, field);
        Mat dense = Mat::Zero(1 << n, 1 << n);
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j)
            for (int a = 0; a < 3; ++a)
              dense += sgn[a] * mu[a] * std::pow(lam[a], j - i - 1) * op_at(sig[a], i, n) *
                       op_at(sig[a], j, n);
        for (int i = 0; i < n; ++i) dense += op_at(field, i, n);
        worst = std::max(worst, (ham::materialize_finite(h, n) - dense).cwiseAbs().maxCoeff());
      }
      {
        const ham::HamiltonianMPO h = ham::build_ising_mpo(-0.8, 0.2 * gate::pauli_x());
        Mat dense = Mat::Zero(1 << n, 1 << n);
        for (int i = 0; i + 1 < n; ++i)
          dense += -0.8 * op_at(sig[2], i, n) * op_at(sig[2], i + 1, n);
        for (int i = 0; i < n; ++i) dense += op_at(0.2 * gate::pauli_x(), i, n);
        worst = std::max(worst, (ham::materialize_finite(h, n) - dense).cwiseAbs().maxCoeff());
      }
    }
    record_bound("ham-mpo-dense-window", worst, 1e-12);

    const int rank_nn = ham::operator_schmidt_rank(
        ham::materialize_finite(ham::build_nn_mpo({0.7, -0.4, 1.1}, field), 6), 6, 3);
    const int rank_ising = ham::operator_schmidt_rank(
        ham::materialize_finite(ham::build_ising_mpo(1.0, Mat::Zero(2, 2)), 6), 6, 3);
    char detail[64];
    std::snprintf(detail, sizeof(detail), "nn=%d ising=%d", rank_nn, rank_ising);
    record("ham-mpo-schmidt-ranks", rank_nn == 5 && rank_ising == 3, detail);
  }

  void expfits() {
    auto fit_power = [&](double p, int n, int n_fit) {
      Vec f(n_fit);
      for (int r = 1; r <= n_fit; ++r) f(r - 1) = std::pow(static_cast<double>(r), -p);
      return expfit::fit_exp_sum(f, n, expfit::PencilMethod::Qr);
    };
    const auto f3 = fit_power(3.0, 10, 1000);
    record_bound("expfit-p3-l1", f3.l1_cost, 2e-5);
    record_bound("expfit-p3-maxdev", f3.max_abs_dev, 1e-7);
    record_bound("expfit-p2-maxdev", fit_power(2.0, 10, 1000).max_abs_dev, 1e-5);
    record_bound("expfit-p1-maxdev", fit_power(1.0, 10, 1000).max_abs_dev, 1e-3);
    // exact exponential input recovers itself
    Vec g(200);
    for (int r = 1; r <= 200; ++r)
      g(r - 1) = 0.8 * std::pow(0.6, r) - 0.3 * std::pow(0.4, r);
    record_bound("expfit-exact-recovery", expfit::fit_exp_sum(g, 2).l1_cost, 1e-10);
  }

  static imps::UniformMPS seeded_state(int d, unsigned seed, double noise = 0.3) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss;
    imps::UniformMPS s;
    for (int i = 0; i < 2; ++i) {
      Mat a(d, d);
      for (int r = 0; r < d; ++r)
        for (int c = r; c < d; ++c) a(r, c) = a(c, r) = noise * gauss(rng);
      if (i == 0) a += Mat::Identity(d, d);
      s.a.push_back(a);
    }
    return imps::normalize(s);
  }

  static double aitken_slope(const imps::UniformMPS& s, const ham::HamiltonianMPO& h, int n) {
    const double w0 = thermo::finite_window_expectation(s, h, n - 2);
    const double w1 = thermo::finite_window_expectation(s, h, n - 1);
    const double w2 = thermo::finite_window_expectation(s, h, n);
    const double w3 = thermo::finite_window_expectation(s, h, n + 1);
    const double d0 = w1 - w0, d1 = w2 - w1, d2 = w3 - w2;
    const double denom = d2 - 2 * d1 + d0;
    if (std::abs(denom) < 1e-14 * std::max(1.0, std::abs(d2))) return d2;
    return d2 - (d2 - d1) * (d2 - d1) / denom;
  }

  /// Dense windowed <(H_N - N lam)^2> via elementary-string sandwiches
  /// between the transfer fixed points, fully independent of the Jordan path.
  static double dense_window2(const imps::UniformMPS& mps, const ham::HamiltonianMPO& h,
                              int n, double lam) {
    const thermo::FixedPoints fp = thermo::fixed_points(mps);
    const int d = mps.bond();
    const Mat xl = Eigen::Map<const Mat>(fp.left.data(), d, d);
    const Mat xr = Eigen::Map<const Mat>(fp.right.data(), d, d);
    Mat hn = ham::materialize_finite(h, n);
    hn -= n * lam * Mat::Identity(hn.rows(), hn.cols());
    const Mat h2 = hn * hn;
    double total = 0;
    for (long b = 0; b < h2.rows(); ++b)
      for (long k = 0; k < h2.cols(); ++k) {
        if (h2(b, k) == 0.0) continue;
        Mat m = xr;
        for (int si = n - 1; si >= 0; --si)
          m = mps.a[(k >> (n - 1 - si)) & 1] * m * mps.a[(b >> (n - 1 - si)) & 1].transpose();
        total += h2(b, k) * (xl.transpose() * m).trace();
      }
    return total;
  }

  void jordan() {
    const Mat field = 0.3 * gate::pauli_x() + 0.1 * gate::pauli_z();
    std::vector<ham::HamiltonianMPO> hs;
    hs.push_back(ham::build_nn_mpo({0.7, -0.4, 1.1}, field));
    hs.push_back(ham::build_ising_mpo(-1.0, 0.2 * gate::pauli_z()));
    hs.push_back(ham::build_expdecay_mpo({1.0, 1.0, 1.0}, {0.6, 0.6, 0.6}, Mat::Zero(2, 2)));
    if (full)
      hs.push_back(ham::build_expdecay_mpo({0.0, 0.0, 1.0}, {0.3, 0.3, 0.8}, field));
    double worst_slope = 0, worst_q = 0;
    std::vector<imps::UniformMPS> states;
    states.push_back(seeded_state(3, 23));
    if (full) states.push_back(seeded_state(4, 29));
    for (const auto& s : states)
      for (const auto& h : hs) {
        const thermo::JordanEvaluation ev = thermo::energy_density(s, h);
        worst_slope = std::max(worst_slope, std::abs(ev.energy - aitken_slope(s, h, 60)));
        CVec qtl = ev.qt_l, qr = ev.q_r;
        const double c = std::real(qtl.cwiseProduct(qr).sum());
        worst_q = std::max(worst_q, std::abs(ev.energy * c - 1.0));
        worst_q = std::max(worst_q, std::abs(ev.energy * std::real(ev.pairing) - 1.0));
      }
    record_bound("jordan-window-slope", worst_slope, 1e-9);
    record_bound("jordan-q12-identity", worst_q, 1e-10);

    {
      // Product states carry no connected correlations beyond overlapping
      // supports, so their dense window is an exact quadratic polynomial from
      // N = 4 on. Any entangled state would add eta^N transients that swamp
      // 1e-8 at these N (the large-N asymptote is covered elsewhere). The
      // shifts keep e' away from zero so the chains stay rank 3.
      const ham::HamiltonianMPO h = ham::build_nn_mpo({0.7, -0.4, 1.1}, field);
      double worst_var = 0;
      for (double ang : {0.64, 2.1}) {
        Vec tilt(2);
        tilt << std::cos(ang), std::sin(ang);
        const imps::UniformMPS sp = imps::normalize(imps::product_state(tilt));
        const double ep = thermo::energy_density(sp, h).energy;
        for (double lam : {ep + 0.4, ep - 0.7}) {
          const thermo::VarianceResult vr = thermo::variance_density(sp, h, lam);
          for (int n = 5; n <= (full ? 8 : 7); ++n) {
            const double ref = dense_window2(sp, h, n, lam);
            const double pred = vr.c0 + vr.c1 * n + vr.c2 * 0.5 * n * (n - 1);
            worst_var = std::max(worst_var, std::abs(pred - ref) / std::max(1.0, std::abs(ref)));
          }
        }
      }
      record_bound("jordan-variance-dense-window", worst_var, 1e-8);
    }

    Vec plus(2);
    plus << 1, 1;
    const auto v = thermo::variance_density(imps::normalize(imps::product_state(plus)),
                                            ham::build_ising_mpo(1.0, Mat::Zero(2, 2)), 0.0);
    record_bound("jordan-plus-variance", std::abs(v.c1 - 1.0) + std::abs(v.c2), 1e-10);

    Vec up(2);
    up << 1, 0;
    const imps::UniformMPS sup = imps::normalize(imps::product_state(up));
    const ham::HamiltonianMPO hcl = ham::build_ising_mpo(-0.7, -0.3 * gate::pauli_z());
    const double e = thermo::energy_density(sup, hcl).energy;
    const auto vz = thermo::variance_density(sup, hcl, e);
    record_bound("jordan-eigenstate-variance", std::abs(vz.c1) + std::abs(vz.c2), 1e-10);
  }

  void closure() {
    imps::UniformMPS s = seeded_state(6, 5);
    const gate::GateMPO g = gate::build_zz_gate(0.05);
    double worst = 0;
    for (int cycle = 0; cycle < 100; ++cycle) {
      s = imps::apply_gate(s, g);
      auto [t, rep] = imps::truncate(s, 6);
      s = imps::normalize(t);
      for (const Mat& a : s.a)
        worst = std::max(worst, (a - a.transpose()).cwiseAbs().maxCoeff());
    }
    record_bound("real-symmetric-closure", worst, 1e-12);
  }

  void gauge() {
    std::mt19937 rng(31);
    std::normal_distribution<double> gauss;
    double worst_orth = 0, worst_ratio = 0;
    for (int trial = 0; trial < 3; ++trial) {
      const int d = 4;
      CMat x(d, d);
      for (int r = 0; r < d; ++r)
        for (int c = r; c < d; ++c) x(r, c) = x(c, r) = cplx(gauss(rng), gauss(rng));
      const imps::GaugeReport rep = imps::gauge_condition(x);
      worst_orth = std::max(worst_orth,
                            (rep.q * rep.q.transpose() - CMat::Identity(d, d)).cwiseAbs().maxCoeff());
      worst_ratio = std::max(worst_ratio, rep.ratio_before - rep.ratio_after);
    }
    record_bound("gauge-orthogonality", worst_orth, 1e-10);
    record_bound("gauge-ratio-monotone", worst_ratio, 1e-12);

    // A real symmetric input is already in optimal gauge: Q must stay at I.
    CMat xr = CMat::Zero(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = r; c < 3; ++c) xr(r, c) = xr(c, r) = cplx(gauss(rng), 0.0);
    const imps::GaugeReport id = imps::gauge_condition(xr);
    record_bound("gauge-real-identity",
                 (id.q - CMat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
  }

  void tfi_b0() {
    std::vector<imps::StageConfig> sched{{0.1, 100, 0.0}, {0.05, 100, 0.0}};
    const auto run = imps::ground_state_search(gate::Model::Tfi, 0.0, 1, sched);
    record_bound("tfi-b0-classical", std::abs(run.energy_measured + 1.0), 1e-12);
  }

  void d64_runs() {
    {
      Timer t;
      const auto run = imps::ground_state_search(gate::Model::Tfi, 1.0, 64,
                                                 imps::default_schedule(2.5e-3));
      const double ref = tfi_reference(1.0);
      const double rel = std::abs(run.energy - ref) / std::abs(ref);
      char detail[128];
      std::snprintf(detail, sizeof(detail), "rel %.3e <= 5e-9, %d sweeps, %s", rel,
                    run.total_sweeps, t.str().c_str());
      record("tfi-b1-d64", rel <= 5e-9, detail);
    }
    {
      Timer t;
      const auto run = imps::ground_state_search(gate::Model::Heisenberg, 0.0, 64,
                                                 imps::default_schedule(5e-3));
      const double rel = std::abs(run.energy - kHeisenbergReference) /
                         std::abs(kHeisenbergReference);
      char detail[128];
      std::snprintf(detail, sizeof(detail), "rel %.3e <= 1e-5, %d sweeps, %s", rel,
                    run.total_sweeps, t.str().c_str());
      record("heisenberg-d64", rel <= 1e-5, detail);
    }
  }

  void run() {
    gates();
    pepos();
    hams();
    expfits();
    jordan();
    closure();
    gauge();
    tfi_b0();
    if (full) d64_runs();
  }
};

int cmd_verify(const config::Settings& cfg, const std::string& outdir) {
  const std::string level = cfg.get("level", "fast");
  if (level != "fast" && level != "full") throw Error("verify: level must be fast or full");
  Timer timer;
  Verifier v;
  v.full = level == "full";
  v.inject_gate_fault = cfg.get_bool("inject_gate_fault", false);
  v.run();

  json rec;
  rec["command"] = "verify";
  rec["level"] = level;
  rec["checks"] = v.checks;
  rec["all_pass"] = v.all_pass;
  rec["wall_time"] = timer.str();
  write_json(out_path(outdir, cfg.get("result_out", "verify.json")), rec);
  std::printf("verify %s: %s (%s)\n", level.c_str(), v.all_pass ? "all checks passed" : "FAILURES",
              timer.str().c_str());
  return v.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "mpoforge: matrix product operator constructions and translationally\n"
      "invariant ground-state tools.\n\n"
      "Config keys (key=value overrides after the subcommand; later wins):\n"
      "  ground-state: model=tfi|heisenberg (tfi), field=B (1.0), d=D_max (16),\n"
      "    eps_final (2.5e-3), schedule=eps list, sweeps=cap list, tols=list,\n"
      "    trace_out (trace.csv), state_out (state.mps), result_out (result.json)\n"
      "  expfit: p (3.0), n (10), n_fit (1000), method=qr|direct (qr),\n"
      "    input=CSV of k,f rows, curve_out (fit.csv), result_out (result.json)\n"
      "  longrange: mpo=nn|ising|expdecay|powerlaw (nn), mu=list, lambda=list,\n"
      "    p, n, n_fit, op=x|z, field_x (0), field_z (0), state=dump path,\n"
      "    state_kind=product0|plus|random (product0), state_d (2), seed (1),\n"
      "    variance=bool (true), variance_shift=e|number (e), window=N (0=off)\n"
      "  verify: level=fast|full (fast), inject_gate_fault=bool (false; testing\n"
      "    hook that flips the C^1 sign so the gate suite must fail)"};
  app.require_subcommand(1);

  std::string config_path, output_dir = ".";
  std::vector<std::string> overrides;
  std::string command;
  for (const char* name : {"ground-state", "expfit", "longrange", "verify"}) {
    CLI::App* sub = app.add_subcommand(name, "");
    sub->add_option("--config", config_path, "flat key=value config file");
    sub->add_option("--output-dir", output_dir, "directory for result files");
    sub->add_option("overrides", overrides, "key=value overrides");
    sub->callback([&command, name]() { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const config::Settings cfg = resolve_settings(config_path, overrides);
    if (command == "ground-state") return cmd_ground_state(cfg, output_dir);
    if (command == "expfit") return cmd_expfit(cfg, output_dir);
    if (command == "longrange") return cmd_longrange(cfg, output_dir);
    if (command == "verify") return cmd_verify(cfg, output_dir);
    std::fprintf(stderr, "mpoforge: no command selected\n");
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "mpoforge: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mpoforge: unexpected error: %s\n", e.what());
    return 1;
  }
}
