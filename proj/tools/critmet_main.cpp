// critmet command-line tool: simulation runs, parameter sweeps, bound
// audits, scaling fits and protocol solving on top of the libcritmet C API.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric error,
// 4 I/O error, 5 bound-audit violation.

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "critmet.h"

using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;
constexpr int kExitViolation = 5;

int exit_code_of(critmet_status s) {
  switch (s) {
    case CRITMET_OK: return 0;
    case CRITMET_ERR_INVALID_ARGUMENT:
    case CRITMET_ERR_DOMAIN: return kExitConfig;
    case CRITMET_ERR_IO: return kExitIo;
    default: return kExitNumeric;
  }
}

struct CliError {
  int code;
  std::string message;
};

void check(critmet_status s, const std::string& what) {
  if (s != CRITMET_OK)
    throw CliError{exit_code_of(s), what + ": " + critmet_last_error()};
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// RAII wrappers over the C handles.
struct ScheduleHandle {
  critmet_schedule* p = nullptr;
  ScheduleHandle() = default;
  ScheduleHandle(ScheduleHandle&& o) noexcept : p(o.p) { o.p = nullptr; }
  ScheduleHandle& operator=(ScheduleHandle&& o) noexcept {
    std::swap(p, o.p);
    return *this;
  }
  ScheduleHandle(const ScheduleHandle&) = delete;
  ~ScheduleHandle() { critmet_schedule_free(p); }
};

struct TrajectoryHandle {
  critmet_trajectory* p = nullptr;
  ~TrajectoryHandle() { critmet_trajectory_free(p); }
};

struct OpenRunHandle {
  critmet_open_run* p = nullptr;
  ~OpenRunHandle() { critmet_open_run_free(p); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError{kExitIo, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError{kExitIo, "cannot write " + tmp};
    out << content;
    if (!out.good()) throw CliError{kExitIo, "write failed: " + tmp};
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw CliError{kExitIo, "rename failed: " + path};
}

int worker_count(int flag_value) {
  if (const char* env = std::getenv("CRITMET_WORKERS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return flag_value > 0 ? flag_value : 1;
}

void run_parallel(int workers, int njobs, const std::function<void(int)>& job) {
  std::atomic<int> next{0};
  auto loop = [&] {
    for (int i; (i = next.fetch_add(1)) < njobs;) job(i);
  };
  if (workers <= 1 || njobs <= 1) {
    loop();
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(workers, njobs); ++w) pool.emplace_back(loop);
  for (auto& t : pool) t.join();
}

// ------------------------------------------------------------- schedules

ScheduleHandle make_schedule_from_spec(const std::string& spec, double omega,
                                       double eps, int n, bool optimize,
                                       double T, double eps_max,
                                       bool programmed) {
  ScheduleHandle h;
  if (spec == "quench") {
    check(critmet_schedule_constant(eps * omega, eps_max * omega, &h.p),
          "quench schedule");
    return h;
  }
  if (spec == "onoff") {
    critmet_onoff_solution sol;
    if (optimize) {
      int n_max = static_cast<int>(std::ceil(0.25 * omega * T)) + 3;
      check(critmet_onoff_optimize(T, eps_max * omega, omega, n_max, &sol,
                                   nullptr, 0, nullptr, nullptr),
            "protocol optimization");
    } else {
      check(critmet_onoff_solve(T, n, eps_max * omega, omega, &sol),
            "protocol solve");
    }
    if (!sol.feasible)
      throw CliError{kExitConfig,
                     "no feasible on-off protocol for the given T and n"};
    if (programmed)
      check(critmet_schedule_from_onoff(&sol, omega, &h.p),
            "programmed realization");
    else
      check(critmet_feedback_from_onoff(&sol, &h.p), "feedback realization");
    return h;
  }
  std::string text = spec;
  if (!spec.empty() && spec[0] == '@')
    text = read_file(spec.substr(1));
  else if (!spec.empty() && spec[0] != '{')
    text = read_file(spec);
  check(critmet_schedule_parse(text.c_str(), omega, &h.p), "schedule parse");
  return h;
}

// Random schedule draws for the audit harnesses (seeded, reproducible).
ScheduleHandle random_admissible(std::mt19937_64& rng, double omega,
                                 double eps_max, double t_max, double* T_out) {
  (void)omega;
  std::uniform_int_distribution<int> nseg(1, 6);
  std::uniform_real_distribution<double> ulevel(0.0, eps_max);
  std::uniform_real_distribution<double> utime(0.2, t_max);
  std::uniform_real_distribution<double> uw(0.05, 1.0);
  double T = utime(rng);
  int k = nseg(rng);
  std::vector<double> w(k), durations(k), eps(k);
  double wsum = 0;
  for (auto& x : w) {
    x = uw(rng);
    wsum += x;
  }
  for (int i = 0; i < k; ++i) {
    durations[i] = T * w[i] / wsum;
    eps[i] = ulevel(rng);
  }
  ScheduleHandle h;
  check(critmet_schedule_piecewise(durations.data(), eps.data(), k, eps_max,
                                   &h.p),
        "random schedule");
  *T_out = T;
  return h;
}

ScheduleHandle random_monotone(std::mt19937_64& rng, double omega,
                               double t_max, double* T_out) {
  std::uniform_real_distribution<double> ulevel(0.0, omega);
  std::uniform_real_distribution<double> utime(1.0, t_max);
  std::bernoulli_distribution use_ramp(0.5);
  double T = utime(rng);
  *T_out = T;
  ScheduleHandle h;
  if (use_ramp(rng)) {
    double a = ulevel(rng), b = ulevel(rng);
    if (a > b) std::swap(a, b);
    check(critmet_schedule_ramp(a, b, T, omega, &h.p), "random ramp");
    return h;
  }
  std::uniform_int_distribution<int> nseg(1, 6);
  std::uniform_real_distribution<double> uw(0.05, 1.0);
  int k = nseg(rng);
  std::vector<double> levels(k), w(k), durations(k);
  for (auto& l : levels) l = ulevel(rng);
  std::sort(levels.begin(), levels.end());
  double wsum = 0;
  for (auto& x : w) {
    x = uw(rng);
    wsum += x;
  }
  for (int i = 0; i < k; ++i) durations[i] = T * w[i] / wsum;
  check(critmet_schedule_piecewise(durations.data(), levels.data(), k, omega,
                                   &h.p),
        "random monotone schedule");
  return h;
}

critmet_integrator_config config_for(double T, double rel_tol, double abs_tol,
                                     int samples) {
  critmet_integrator_config cfg;
  critmet_integrator_config_default(&cfg);
  cfg.rel_tol = rel_tol;
  cfg.abs_tol = abs_tol;
  cfg.output_stride = samples > 0 ? T / samples : 0.0;
  return cfg;
}

// ------------------------------------------------------------- simulate

struct SimulateOpts {
  std::string schedule = "quench";
  double wT = 3.0;
  double omega = 1.0;
  double eps = 1.0;
  double eps_max = 1.0;
  int n = 0;
  bool optimize = false;
  bool programmed = false;
  bool oracle = false;
  double oracle_tol = 1e-3;
  bool open = false;
  double gamma = 0.0;
  double nbar = 0.0;
  std::string out = "trajectory.csv";
  std::string bounds_out;  // optional per-cycle bound-report CSV
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int samples = 512;
};

int cmd_simulate(const SimulateOpts& o) {
  double T = o.wT / o.omega;
  bool programmed = o.programmed || o.oracle;  // the oracle needs segments
  ScheduleHandle sched = make_schedule_from_spec(
      o.schedule, o.omega, o.eps, o.n, o.optimize, T, o.eps_max, programmed);
  critmet_integrator_config cfg =
      config_for(T, o.rel_tol, o.abs_tol, o.samples);

  if (o.open) {
    OpenRunHandle run;
    critmet_open_params op{o.gamma, o.nbar};
    check(critmet_integrate_open(o.omega, op, sched.p, T, &cfg, &run.p),
          "open-system integration");
    check(critmet_open_run_write_csv(run.p, o.out.c_str()), "CSV export");
    critmet_cov_state last;
    check(critmet_open_run_state(run.p, critmet_open_run_size(run.p) - 1,
                                 &last),
          "final state");
    double bound = 0;
    check(critmet_open_run_qfi_bound(run.p, T, &bound), "QFI bound");
    std::cout << "final: r=" << fmt(last.r) << " phi=" << fmt(last.phi)
              << " mu=" << fmt(last.mu) << " qfi_bound=" << fmt(bound)
              << " csv=" << o.out << "\n";
    return 0;
  }

  TrajectoryHandle traj;
  check(critmet_integrate(o.omega, sched.p, T, &cfg, &traj.p), "integration");
  check(critmet_trajectory_write_csv(traj.p, o.out.c_str()), "CSV export");
  critmet_phase_state fin;
  check(critmet_trajectory_final(traj.p, &fin), "final state");
  critmet_qfi_result q;
  check(critmet_trajectory_qfi(traj.p, &q), "QFI");
  std::cout << "final: r=" << fmt(fin.r) << " Phi=" << fmt(fin.phi)
            << " winding=" << critmet_trajectory_winding(traj.p)
            << " qfi=" << fmt(q.value) << " envelope=" << fmt(q.envelope)
            << " csv=" << o.out << "\n";

  if (!o.bounds_out.empty()) {
    int len = 0;
    check(critmet_cycle_growth_check(traj.p, o.eps_max * o.omega, o.omega,
                                    nullptr, 0, &len),
          "bound check");
    std::vector<critmet_bound_report> reps(len);
    check(critmet_cycle_growth_check(traj.p, o.eps_max * o.omega, o.omega,
                                    reps.data(), len, &len),
          "bound check");
    std::ostringstream csv;
    csv << "kind,cycle,bound,observed,margin,satisfied\n";
    for (int i = 0; i < len; ++i)
      csv << reps[i].kind << ',' << reps[i].cycle << ',' << fmt(reps[i].bound)
          << ',' << fmt(reps[i].observed) << ',' << fmt(reps[i].margin) << ','
          << reps[i].satisfied << '\n';
    write_atomic(o.bounds_out, csv.str());
  }

  if (o.oracle) {
    critmet_oracle_report rep;
    check(critmet_oracle_check(sched.p, T, o.omega, 0, 0.0, 0.0, &rep),
          "oracle check");
    std::cout << "oracle: rel_r=" << fmt(rep.rel_r)
              << " phi_diff=" << fmt(rep.phi_diff)
              << " rel_qfi=" << fmt(rep.rel_qfi) << "\n";
    bool ok = rep.rel_r < o.oracle_tol && rep.phi_diff < o.oracle_tol &&
              rep.rel_qfi < o.oracle_tol;
    if (!ok) return kExitNumeric;
  }
  return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepSpec {
  std::string mode = "fixed_n";
  std::vector<double> T_grid;
  std::vector<int> n_list = {0};
  double eps_max = 1.0;
  std::vector<double> gamma_list = {0.0};
  double nbar = 0.0;
  double omega = 1.0;
  unsigned long long seed = 1234;
  int count = 50;  // monotone_family draws
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int samples = 256;
  std::string out = "sweep.csv";
  int workers = 1;
};

std::vector<double> grid_from_json(const json& j) {
  std::vector<double> g;
  if (j.is_array()) {
    for (auto& v : j) g.push_back(v.get<double>());
    return g;
  }
  double lo = j.at("lo").get<double>();
  double hi = j.at("hi").get<double>();
  int points = j.at("points").get<int>();
  bool logspace = j.value("log", false);
  if (points < 1 || !(hi > lo) || (logspace && !(lo > 0)))
    throw CliError{kExitConfig, "bad T grid specification"};
  for (int i = 0; i < points; ++i) {
    double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    g.push_back(logspace ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
  }
  return g;
}

SweepSpec sweep_spec_from_config(const std::string& path) {
  SweepSpec s;
  if (path.empty()) return s;
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    throw CliError{kExitConfig, std::string("config parse: ") + e.what()};
  }
  try {
    if (j.contains("mode")) s.mode = j["mode"].get<std::string>();
    if (j.contains("T")) s.T_grid = grid_from_json(j["T"]);
    if (j.contains("n")) s.n_list = j["n"].get<std::vector<int>>();
    if (j.contains("eps_max")) s.eps_max = j["eps_max"].get<double>();
    if (j.contains("gamma")) {
      if (j["gamma"].is_array())
        s.gamma_list = j["gamma"].get<std::vector<double>>();
      else
        s.gamma_list = {j["gamma"].get<double>()};
    }
    if (j.contains("nbar")) s.nbar = j["nbar"].get<double>();
    if (j.contains("seed")) s.seed = j["seed"].get<unsigned long long>();
    if (j.contains("count")) s.count = j["count"].get<int>();
    if (j.contains("rel_tol")) s.rel_tol = j["rel_tol"].get<double>();
    if (j.contains("abs_tol")) s.abs_tol = j["abs_tol"].get<double>();
    if (j.contains("samples")) s.samples = j["samples"].get<int>();
    if (j.contains("out")) s.out = j["out"].get<std::string>();
    if (j.contains("workers")) s.workers = j["workers"].get<int>();
  } catch (const std::exception& e) {
    throw CliError{kExitConfig, std::string("config field: ") + e.what()};
  }
  return s;
}

class Journal {
 public:
  explicit Journal(const std::string& path) : path_(path) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      auto sp1 = line.find(' ');
      if (sp1 == std::string::npos) continue;
      auto sp2 = line.find(' ', sp1 + 1);
      std::string tag = line.substr(0, sp1);
      std::string key = (sp2 == std::string::npos)
                            ? line.substr(sp1 + 1)
                            : line.substr(sp1 + 1, sp2 - sp1 - 1);
      std::string payload =
          (sp2 == std::string::npos) ? "" : line.substr(sp2 + 1);
      if (tag == "done") done_[key] = payload;
    }
    out_.open(path_, std::ios::app);
  }

  bool has(const std::string& key, std::string* payload) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = done_.find(key);
    if (it == done_.end()) return false;
    *payload = it->second;
    return true;
  }

  void record_done(const std::string& key, const std::string& payload) {
    std::lock_guard<std::mutex> lock(mu_);
    done_[key] = payload;
    out_ << "done " << key << ' ' << payload << std::endl;
  }

  void record_failed(const std::string& key, const std::string& why) {
    std::lock_guard<std::mutex> lock(mu_);
    out_ << "failed " << key << ' ' << why << std::endl;
  }

 private:
  std::string path_;
  std::map<std::string, std::string> done_;
  std::ofstream out_;
  std::mutex mu_;
};

int cmd_sweep(const SweepSpec& spec) {
  if (spec.T_grid.empty() && spec.mode != "monotone_family")
    throw CliError{kExitConfig, "sweep needs a T grid"};
  for (size_t i = 0; i < spec.T_grid.size(); ++i) {
    if (!(spec.T_grid[i] > 0.0))
      throw CliError{kExitConfig, "T grid values must be positive"};
    if (i > 0 && !(spec.T_grid[i] > spec.T_grid[i - 1]))
      throw CliError{kExitConfig, "T grid must be strictly increasing"};
  }

  struct Job {
    std::string key;
    std::function<std::string()> run;
  };
  std::vector<Job> jobs;
  std::string header;
  const double omega = spec.omega;

  auto closed_row = [&, omega](double T, const critmet_onoff_solution& sol) {
    ScheduleHandle sched;
    check(critmet_feedback_from_onoff(&sol, &sched.p), "realization");
    critmet_integrator_config cfg =
        config_for(T, spec.rel_tol, spec.abs_tol, spec.samples);
    TrajectoryHandle traj;
    check(critmet_integrate(omega, sched.p, T, &cfg, &traj.p), "integrate");
    critmet_phase_state fin;
    check(critmet_trajectory_final(traj.p, &fin), "final");
    critmet_qfi_result q;
    check(critmet_trajectory_qfi(traj.p, &q), "qfi");
    std::ostringstream row;
    row << fmt(T) << ',' << sol.n << ',' << fmt(spec.eps_max) << ','
        << fmt(q.value) << ',' << fmt(q.envelope) << ',' << fmt(fin.r) << ','
        << critmet_trajectory_winding(traj.p);
    return row.str();
  };

  if (spec.mode == "fixed_n" || spec.mode == "optimal_n") {
    header = "T,n,eps_max,qfi,envelope,r_final,winding";
    std::vector<int> ns =
        spec.mode == "fixed_n" ? spec.n_list : std::vector<int>{-1};
    for (int n : ns) {
      for (double T : spec.T_grid) {
        std::string key = (spec.mode == "fixed_n")
                              ? "n=" + std::to_string(n) + ";T=" + fmt(T)
                              : "T=" + fmt(T);
        jobs.push_back({key, [&, n, T]() {
          critmet_onoff_solution sol;
          if (n >= 0) {
            check(critmet_onoff_solve(T, n, spec.eps_max * omega, omega, &sol),
                  "solve");
          } else {
            int n_max = static_cast<int>(std::ceil(0.25 * omega * T)) + 3;
            check(critmet_onoff_optimize(T, spec.eps_max * omega, omega, n_max,
                                         &sol, nullptr, 0, nullptr, nullptr),
                  "optimize");
          }
          if (!sol.feasible) throw CliError{kExitNumeric, "infeasible"};
          return closed_row(T, sol);
        }});
      }
    }
  } else if (spec.mode == "open") {
    header = "T,n,eps_max,gamma,nbar,qfi_bound,r_final,mu_final";
    for (double gamma : spec.gamma_list) {
      for (double T : spec.T_grid) {
        std::string key = "gamma=" + fmt(gamma) + ";T=" + fmt(T);
        jobs.push_back({key, [&, gamma, T]() {
          critmet_onoff_solution sol;
          int n_max = static_cast<int>(std::ceil(0.25 * omega * T)) + 3;
          check(critmet_onoff_optimize(T, spec.eps_max * omega, omega, n_max,
                                       &sol, nullptr, 0, nullptr, nullptr),
                "optimize");
          if (!sol.feasible) throw CliError{kExitNumeric, "infeasible"};
          ScheduleHandle sched;
          check(critmet_schedule_from_onoff(&sol, omega, &sched.p),
                "programmed realization");
          critmet_integrator_config cfg =
              config_for(T, spec.rel_tol, spec.abs_tol, spec.samples);
          OpenRunHandle run;
          critmet_open_params op{gamma, spec.nbar};
          check(critmet_integrate_open(omega, op, sched.p, T, &cfg, &run.p),
                "open integrate");
          critmet_cov_state last;
          check(critmet_open_run_state(run.p, critmet_open_run_size(run.p) - 1,
                                       &last),
                "final");
          double bound = 0;
          check(critmet_open_run_qfi_bound(run.p, T, &bound), "bound");
          std::ostringstream row;
          row << fmt(T) << ',' << sol.n << ',' << fmt(spec.eps_max) << ','
              << fmt(gamma) << ',' << fmt(spec.nbar) << ',' << fmt(bound)
              << ',' << fmt(last.r) << ',' << fmt(last.mu);
          return row.str();
        }});
      }
    }
  } else if (spec.mode == "monotone_family") {
    header = "idx,T,winding,qfi";
    for (int i = 0; i < spec.count; ++i) {
      std::string key = "idx=" + std::to_string(i);
      jobs.push_back({key, [&, i]() {
        std::mt19937_64 rng(spec.seed + static_cast<unsigned long long>(i));
        double T = 0;
        ScheduleHandle sched = random_monotone(rng, omega, 20.0, &T);
        critmet_integrator_config cfg =
            config_for(T, spec.rel_tol, spec.abs_tol, spec.samples);
        TrajectoryHandle traj;
        check(critmet_integrate(omega, sched.p, T, &cfg, &traj.p),
              "integrate");
        critmet_qfi_result q;
        check(critmet_trajectory_qfi(traj.p, &q), "qfi");
        std::ostringstream row;
        row << i << ',' << fmt(T) << ',' << critmet_trajectory_winding(traj.p)
            << ',' << fmt(q.value);
        return row.str();
      }});
    }
  } else {
    throw CliError{kExitConfig, "unknown sweep mode: " + spec.mode};
  }

  Journal journal(spec.out + ".journal");
  std::vector<std::optional<std::string>> results(jobs.size());
  std::mutex err_mutex;
  std::vector<std::string> errors;

  run_parallel(worker_count(spec.workers), static_cast<int>(jobs.size()),
               [&](int i) {
                 std::string payload;
                 if (journal.has(jobs[i].key, &payload)) {
                   results[i] = payload;
                   return;
                 }
                 try {
                   payload = jobs[i].run();
                   results[i] = payload;
                   journal.record_done(jobs[i].key, payload);
                 } catch (const CliError& e) {
                   journal.record_failed(jobs[i].key, e.message);
                   std::lock_guard<std::mutex> lock(err_mutex);
                   errors.push_back(jobs[i].key + ": " + e.message);
                 }
               });

  // deterministic output: jobs were generated in sorted key order
  std::ostringstream csv;
  csv << header << '\n';
  size_t written = 0;
  for (auto& r : results)
    if (r) {
      csv << *r << '\n';
      ++written;
    }
  write_atomic(spec.out, csv.str());
  std::cout << "sweep: " << written << "/" << jobs.size() << " rows -> "
            << spec.out << "\n";
  for (auto& e : errors) std::cerr << "row failed: " << e << "\n";
  return 0;
}

// ---------------------------------------------------------------- bounds

struct BoundsOpts {
  int random = 100;
  int monotone = 200;
  int subcritical = 50;
  unsigned long long seed = 42;
  double wT_max = 20.0;
  double eps_max = 1.0;
  double omega = 1.0;
  std::string out;
  int workers = 1;
};

int cmd_bounds(const BoundsOpts& o) {
  struct CheckResult {
    std::string kind;
    int total = 0;
    int violations = 0;
    double worst_margin = 1e300;
  };
  std::vector<CheckResult> checks(4);
  checks[0].kind = "poly_bound_random";
  checks[1].kind = "cycle_growth";
  checks[2].kind = "monotone_winding";
  checks[3].kind = "squeezing_cap_subcritical";
  std::mutex mu;

  critmet_integrator_config base_cfg;
  critmet_integrator_config_default(&base_cfg);
  base_cfg.rel_tol = 1e-10;
  base_cfg.abs_tol = 1e-12;

  // Polynomial QFI envelope and per-cycle growth margins on random runs.
  run_parallel(worker_count(o.workers), o.random, [&](int i) {
    std::mt19937_64 rng(o.seed + static_cast<unsigned long long>(i));
    double T = 0;
    ScheduleHandle s =
        random_admissible(rng, o.omega, o.eps_max * o.omega, o.wT_max, &T);
    critmet_integrator_config cfg = base_cfg;
    cfg.output_stride = T / 512;
    TrajectoryHandle traj;
    check(critmet_integrate(o.omega, s.p, T, &cfg, &traj.p), "integrate");
    critmet_qfi_result q;
    check(critmet_trajectory_qfi(traj.p, &q), "qfi");
    int w = critmet_trajectory_winding(traj.p);
    double bound = 0;
    check(critmet_qfi_poly_bound(T, w, o.omega, &bound), "poly bound");
    double margin = bound - q.value;
    std::vector<critmet_bound_report> reps(2 * (w + 2));
    int len = 0;
    check(critmet_cycle_growth_check(traj.p, o.eps_max * o.omega, o.omega,
                                    reps.data(), static_cast<int>(reps.size()),
                                    &len),
          "cycle check");
    std::lock_guard<std::mutex> lock(mu);
    checks[0].total++;
    checks[0].worst_margin = std::min(checks[0].worst_margin, margin);
    if (margin < -1e-9 * std::abs(bound)) checks[0].violations++;
    for (int k = 0; k < len; ++k) {
      checks[1].total++;
      checks[1].worst_margin = std::min(checks[1].worst_margin, reps[k].margin);
      if (!reps[k].satisfied) checks[1].violations++;
    }
  });

  // Monotone drives never wind.
  run_parallel(worker_count(o.workers), o.monotone, [&](int i) {
    std::mt19937_64 rng(o.seed + 1000003ULL * (i + 1));
    double T = 0;
    ScheduleHandle s = random_monotone(rng, o.omega, o.wT_max, &T);
    critmet_integrator_config cfg = base_cfg;
    cfg.output_stride = T / 64;
    TrajectoryHandle traj;
    check(critmet_integrate(o.omega, s.p, T, &cfg, &traj.p), "integrate");
    int w = critmet_trajectory_winding(traj.p);
    std::lock_guard<std::mutex> lock(mu);
    checks[2].total++;
    checks[2].worst_margin =
        std::min(checks[2].worst_margin, -static_cast<double>(w));
    if (w != 0) checks[2].violations++;
  });

  // Squeezing cap on sub-ceiling random schedules plus solved fixed-n runs.
  auto cap_margin_on_trajectory = [&](critmet_trajectory* traj, double eps_cap) {
    size_t m = critmet_trajectory_size(traj);
    double worst = 1e300;
    for (size_t k = 0; k < m; ++k) {
      critmet_phase_state ps;
      check(critmet_trajectory_sample(traj, k, &ps), "sample");
      int w = static_cast<int>(
          std::floor(ps.phi / (2 * 3.14159265358979323846) + 1e-12));
      double cap = 0;
      check(critmet_squeezing_cap(eps_cap, w, o.omega, &cap), "cap");
      worst = std::min(worst, cap - std::sinh(2.0 * ps.r));
    }
    return worst;
  };
  run_parallel(worker_count(o.workers), o.subcritical, [&](int i) {
    std::mt19937_64 rng(o.seed + 7000003ULL * (i + 1));
    double T = 0;
    ScheduleHandle s =
        random_admissible(rng, o.omega, 0.7 * o.omega, o.wT_max, &T);
    critmet_integrator_config cfg = base_cfg;
    cfg.output_stride = T / 512;
    TrajectoryHandle traj;
    check(critmet_integrate(o.omega, s.p, T, &cfg, &traj.p), "integrate");
    double worst = cap_margin_on_trajectory(traj.p, 0.7 * o.omega);
    std::lock_guard<std::mutex> lock(mu);
    checks[3].total++;
    checks[3].worst_margin = std::min(checks[3].worst_margin, worst);
    if (worst < 0.0) checks[3].violations++;
  });
  for (int n = 0; n <= 3; ++n) {
    for (double T : {10.0, 20.0, 30.0}) {
      critmet_onoff_solution sol;
      check(critmet_onoff_solve(T, n, 0.7 * o.omega, o.omega, &sol), "solve");
      if (!sol.feasible) continue;
      ScheduleHandle sched;
      check(critmet_feedback_from_onoff(&sol, &sched.p), "realize");
      critmet_integrator_config cfg = base_cfg;
      cfg.output_stride = T / 512;
      TrajectoryHandle traj;
      check(critmet_integrate(o.omega, sched.p, T, &cfg, &traj.p),
            "integrate");
      double worst = cap_margin_on_trajectory(traj.p, 0.7 * o.omega);
      checks[3].total++;
      checks[3].worst_margin = std::min(checks[3].worst_margin, worst);
      if (worst < 0.0) checks[3].violations++;
    }
  }

  json report;
  report["checks"] = json::array();
  bool all_pass = true;
  for (auto& c : checks) {
    report["checks"].push_back({{"kind", c.kind},
                                {"total", c.total},
                                {"violations", c.violations},
                                {"worst_margin", c.worst_margin}});
    all_pass = all_pass && c.violations == 0;
    std::cout << c.kind << ": " << (c.total - c.violations) << "/" << c.total
              << " ok, worst margin " << fmt(c.worst_margin) << "\n";
  }
  report["pass"] = all_pass;
  std::string text = report.dump(2) + "\n";
  if (!o.out.empty())
    write_atomic(o.out, text);
  else
    std::cout << text;
  return all_pass ? 0 : kExitViolation;
}

// ------------------------------------------------------------------ fit

struct FitOpts {
  std::string csv;
  std::string x = "T";
  std::string y = "qfi";
  std::string kind = "power";
  std::string where;  // "col=value" row filter
  double lo = 0.0;
  double hi = 0.0;
};

int cmd_fit(const FitOpts& o) {
  std::ifstream in(o.csv);
  if (!in) throw CliError{kExitIo, "cannot open " + o.csv};
  std::string line;
  if (!std::getline(in, line)) throw CliError{kExitConfig, "empty CSV"};
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    out.push_back(cur);
    return out;
  };
  auto header = split(line);
  int xi = -1, yi = -1, wi = -1;
  std::string wcol, wval;
  if (!o.where.empty()) {
    auto eq = o.where.find('=');
    if (eq == std::string::npos)
      throw CliError{kExitConfig, "fit: --where expects col=value"};
    wcol = o.where.substr(0, eq);
    wval = o.where.substr(eq + 1);
  }
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == o.x) xi = static_cast<int>(i);
    if (header[i] == o.y) yi = static_cast<int>(i);
    if (!wcol.empty() && header[i] == wcol) wi = static_cast<int>(i);
  }
  if (xi < 0 || yi < 0)
    throw CliError{kExitConfig, "fit: columns not found in CSV header"};
  if (!wcol.empty() && wi < 0)
    throw CliError{kExitConfig, "fit: filter column not found"};
  std::vector<double> xs, ys;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line);
    if (f.size() != header.size()) continue;
    if (wi >= 0 && f[wi] != wval) continue;
    xs.push_back(std::stod(f[xi]));
    ys.push_back(std::stod(f[yi]));
  }
  if (xs.empty()) throw CliError{kExitConfig, "fit: no data rows"};
  double lo = o.lo, hi = o.hi;
  if (!(hi > lo)) {
    lo = *std::min_element(xs.begin(), xs.end());
    hi = *std::max_element(xs.begin(), xs.end());
    lo -= 1e-12 * std::abs(lo) + 1e-300;
    hi += 1e-12 * std::abs(hi);
  }
  critmet_fit_result fit;
  critmet_status st =
      (o.kind == "exp")
          ? critmet_fit_exponent(xs.data(), ys.data(),
                                 static_cast<int>(xs.size()), lo, hi, &fit)
          : critmet_fit_power_law(xs.data(), ys.data(),
                                  static_cast<int>(xs.size()), lo, hi, &fit);
  check(st, "fit");
  json out = {{"slope", fit.slope},
              {"intercept", fit.intercept},
              {"residual_rms", fit.residual_rms},
              {"window", {fit.window_lo, fit.window_hi}},
              {"points_used", fit.points_used},
              {"kind", o.kind}};
  std::cout << out.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------- oracle-check

struct OracleOpts {
  int count = 20;
  unsigned long long seed = 42;
  double wT_max = 5.0;
  double tol = 1e-3;
  double omega = 1.0;
  double eps_max = 1.0;
};

int cmd_oracle_check(const OracleOpts& o) {
  std::mt19937_64 rng(o.seed);
  int checked = 0, failures = 0, attempts = 0;
  while (checked < o.count && attempts < 50 * o.count) {
    ++attempts;
    double T = 0;
    ScheduleHandle s =
        random_admissible(rng, o.omega, o.eps_max * o.omega, o.wT_max, &T);
    // keep draws in the oracle's comfort zone: 0.1 <= r_final <= 2
    critmet_integrator_config cfg;
    critmet_integrator_config_default(&cfg);
    cfg.output_stride = T;
    TrajectoryHandle traj;
    check(critmet_integrate(o.omega, s.p, T, &cfg, &traj.p), "integrate");
    critmet_phase_state fin;
    check(critmet_trajectory_final(traj.p, &fin), "final");
    if (fin.r < 0.1 || fin.r > 2.0) continue;
    critmet_oracle_report rep;
    check(critmet_oracle_check(s.p, T, o.omega, 0, 0.0, 0.0, &rep),
          "oracle check");
    bool ok = rep.rel_r < o.tol && rep.phi_diff < o.tol && rep.rel_qfi < o.tol;
    std::cout << "schedule " << checked << ": T=" << fmt(T)
              << " rel_r=" << fmt(rep.rel_r)
              << " phi_diff=" << fmt(rep.phi_diff)
              << " rel_qfi=" << fmt(rep.rel_qfi) << (ok ? " ok" : " FAIL")
              << "\n";
    if (!ok) ++failures;
    ++checked;
  }
  if (checked < o.count)
    throw CliError{kExitNumeric, "oracle-check: draw filter exhausted"};
  std::cout << "oracle-check: " << (checked - failures) << "/" << checked
            << " within " << fmt(o.tol) << "\n";
  return failures == 0 ? 0 : kExitNumeric;
}

// -------------------------------------------------------------- protocol

struct ProtocolOpts {
  double wT = 60.0;
  double omega = 1.0;
  double eps_max = 1.0;
  int n = -1;
  bool scan = false;
  int n_max = -1;
};

int cmd_protocol(const ProtocolOpts& o) {
  double T = o.wT / o.omega;
  json out;
  double ps = 0, gamma = 0, nopt = 0;
  check(critmet_phi_star(&ps), "phi_star");
  check(critmet_gamma_exponent(o.eps_max * o.omega, o.omega, &gamma),
        "gamma_exponent");
  check(critmet_n_opt_asymptotic(T, o.omega, &nopt), "n_opt");
  out["phi_star"] = ps;
  out["gamma_exponent"] = gamma;
  out["n_opt_asymptotic"] = nopt;

  auto sol_json = [](const critmet_onoff_solution& s) {
    return json{{"n", s.n},
                {"T", s.T},
                {"eps_max", s.eps_max},
                {"phi_n", s.phi_n},
                {"tilde_phi_n", s.tilde_phi_n},
                {"r_pred", s.r_pred},
                {"feasible", s.feasible != 0}};
  };

  if (o.n >= 0) {
    critmet_onoff_solution sol;
    check(critmet_onoff_solve(T, o.n, o.eps_max * o.omega, o.omega, &sol),
          "solve");
    out["solution"] = sol_json(sol);
  } else {
    int n_max = o.n_max > 0
                    ? o.n_max
                    : static_cast<int>(std::ceil(0.25 * o.omega * T)) + 3;
    std::vector<critmet_onoff_solution> scan(n_max + 1);
    critmet_onoff_solution best;
    int scan_len = 0, tie = -1;
    check(critmet_onoff_optimize(T, o.eps_max * o.omega, o.omega, n_max, &best,
                                 scan.data(), n_max + 1, &scan_len, &tie),
          "optimize");
    out["best"] = sol_json(best);
    if (tie >= 0) out["tie_with"] = tie;
    if (o.scan) {
      out["scan"] = json::array();
      for (int i = 0; i < scan_len; ++i)
        out["scan"].push_back(sol_json(scan[i]));
    }
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critmet: critical-metrology control simulator"};
  app.require_subcommand(1);

  SimulateOpts sim;
  auto* c_sim = app.add_subcommand("simulate", "integrate one schedule");
  c_sim->add_option("--schedule", sim.schedule,
                    "quench | onoff | JSON literal | @file | path");
  c_sim->add_option("--wT", sim.wT, "horizon in units of 1/omega");
  c_sim->add_option("--T", sim.wT, "alias for --wT");
  c_sim->add_option("--omega", sim.omega);
  c_sim->add_option("--eps", sim.eps, "quench level in units of omega");
  c_sim->add_option("--eps-max", sim.eps_max);
  c_sim->add_option("--n", sim.n, "winding number for --schedule onoff");
  c_sim->add_flag("--optimize", sim.optimize);
  c_sim->add_flag("--programmed", sim.programmed,
                  "realize onoff as piecewise segments");
  c_sim->add_flag("--oracle-check", sim.oracle);
  c_sim->add_option("--oracle-tol", sim.oracle_tol);
  c_sim->add_flag("--open", sim.open, "dissipative covariance run");
  c_sim->add_option("--gamma", sim.gamma);
  c_sim->add_option("--nbar", sim.nbar);
  c_sim->add_option("--out", sim.out);
  c_sim->add_option("--bounds-out", sim.bounds_out,
                    "write per-cycle bound reports to this CSV");
  c_sim->add_option("--rel-tol", sim.rel_tol);
  c_sim->add_option("--abs-tol", sim.abs_tol);
  c_sim->add_option("--samples", sim.samples);

  std::string sweep_config;
  SweepSpec sw;
  double sw_tlo = 0, sw_thi = 0;
  int sw_tpoints = 0;
  bool sw_tlog = false;
  std::vector<int> sw_nlist;
  std::vector<double> sw_gammas;
  auto* c_sweep = app.add_subcommand("sweep", "grid of runs to CSV");
  c_sweep->add_option("--config", sweep_config, "JSON sweep spec");
  c_sweep->add_option("--mode", sw.mode,
                      "fixed_n | optimal_n | open | monotone_family");
  c_sweep->add_option("--T-lo", sw_tlo);
  c_sweep->add_option("--T-hi", sw_thi);
  c_sweep->add_option("--T-points", sw_tpoints);
  c_sweep->add_flag("--T-log", sw_tlog);
  c_sweep->add_option("--n", sw_nlist);
  c_sweep->add_option("--gamma", sw_gammas);
  c_sweep->add_option("--nbar", sw.nbar);
  c_sweep->add_option("--eps-max", sw.eps_max);
  c_sweep->add_option("--seed", sw.seed);
  c_sweep->add_option("--count", sw.count);
  c_sweep->add_option("--out", sw.out);
  c_sweep->add_option("--workers", sw.workers);
  c_sweep->add_option("--samples", sw.samples);

  BoundsOpts bo;
  auto* c_bounds = app.add_subcommand("bounds", "randomized bound audits");
  c_bounds->add_option("--random", bo.random);
  c_bounds->add_option("--monotone", bo.monotone);
  c_bounds->add_option("--subcritical", bo.subcritical);
  c_bounds->add_option("--seed", bo.seed);
  c_bounds->add_option("--wT-max", bo.wT_max);
  c_bounds->add_option("--eps-max", bo.eps_max);
  c_bounds->add_option("--out", bo.out, "JSON report path");
  c_bounds->add_option("--workers", bo.workers);

  FitOpts fo;
  auto* c_fit = app.add_subcommand("fit", "scaling-law fit on a sweep CSV");
  c_fit->add_option("--csv", fo.csv)->required();
  c_fit->add_option("--x", fo.x);
  c_fit->add_option("--y", fo.y);
  c_fit->add_option("--kind", fo.kind, "power | exp");
  c_fit->add_option("--where", fo.where, "row filter col=value");
  c_fit->add_option("--window-lo", fo.lo);
  c_fit->add_option("--window-hi", fo.hi);

  OracleOpts oo;
  auto* c_oracle =
      app.add_subcommand("oracle-check", "Gaussian vs number-basis comparison");
  c_oracle->add_option("--count", oo.count);
  c_oracle->add_option("--seed", oo.seed);
  c_oracle->add_option("--wT-max", oo.wT_max);
  c_oracle->add_option("--tol", oo.tol);
  c_oracle->add_option("--eps-max", oo.eps_max);

  ProtocolOpts po;
  auto* c_protocol = app.add_subcommand("protocol", "solve on-off protocols");
  c_protocol->add_option("--wT", po.wT);
  c_protocol->add_option("--T", po.wT, "alias for --wT");
  c_protocol->add_option("--omega", po.omega);
  c_protocol->add_option("--eps-max", po.eps_max);
  c_protocol->add_option("--n", po.n, "fixed winding (omit to optimize)");
  c_protocol->add_flag("--scan", po.scan);
  c_protocol->add_option("--n-max", po.n_max);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*c_sim) return cmd_simulate(sim);
    if (*c_sweep) {
      SweepSpec spec = sweep_spec_from_config(sweep_config);
      if (c_sweep->count("--mode")) spec.mode = sw.mode;
      if (sw_tpoints > 0) {
        json g = {{"lo", sw_tlo},
                  {"hi", sw_thi},
                  {"points", sw_tpoints},
                  {"log", sw_tlog}};
        spec.T_grid = grid_from_json(g);
      }
      if (!sw_nlist.empty()) spec.n_list = sw_nlist;
      if (!sw_gammas.empty()) spec.gamma_list = sw_gammas;
      if (c_sweep->count("--nbar")) spec.nbar = sw.nbar;
      if (c_sweep->count("--eps-max")) spec.eps_max = sw.eps_max;
      if (c_sweep->count("--seed")) spec.seed = sw.seed;
      if (c_sweep->count("--count")) spec.count = sw.count;
      if (c_sweep->count("--out")) spec.out = sw.out;
      if (c_sweep->count("--workers")) spec.workers = sw.workers;
      if (c_sweep->count("--samples")) spec.samples = sw.samples;
      return cmd_sweep(spec);
    }
    if (*c_bounds) return cmd_bounds(bo);
    if (*c_fit) return cmd_fit(fo);
    if (*c_oracle) return cmd_oracle_check(oo);
    if (*c_protocol) return cmd_protocol(po);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}
