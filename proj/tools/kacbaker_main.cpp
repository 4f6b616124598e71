// Command-line driver: partition tables, trace comparisons, spectra of both
// operator realizations, zeta values, zero searches, grid scans and the
// cross-check suite, with reproducible CSV/JSON output.
//
// Exit codes: 0 success, 1 failed verification or computational breakdown,
// 2 usage error (bad flags, domain violations, resource caps), 3 output I/O.

#include <algorithm>
#include <clocale>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "kacbaker/kacg.hpp"
#include "kacbaker/model.hpp"
#include "kacbaker/ruelle.hpp"
#include "kacbaker/spectral.hpp"
#include "kacbaker/verify.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 17 significant digits, lowercase e-notation: enough to round-trip a double,
// and byte-stable across runs so identical configs diff clean.
std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return std::string(buf);
}

std::string cell_text(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return fmt(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

/// Collects one tabular result; renders as CSV (header + rows) or as a JSON
/// document carrying the run parameters alongside the same rows.
struct Emitter {
  ordered_json meta = ordered_json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<ordered_json>> rows;

  std::string render(const std::string& format) const {
    if (format == "json") {
      ordered_json doc;
      doc["schema_version"] = 1;
      for (const auto& item : meta.items()) doc[item.key()] = item.value();
      doc["columns"] = columns;
      doc["rows"] = rows;
      return doc.dump(2) + "\n";
    }
    std::string s;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) s += ',';
      s += columns[i];
    }
    s += '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) s += ',';
        s += cell_text(row[i]);
      }
      s += '\n';
    }
    return s;
  }
};

/// Writes through a temp file in the same directory and renames into place,
/// so a failed run never leaves a partial output file behind.
void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  const std::string tmp = out_path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open output file: " + out_path);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    f.flush();
    if (!f) {
      std::remove(tmp.c_str());
      throw io_error("write failed: " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), out_path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw io_error("cannot move output into place: " + out_path);
  }
}

struct Common {
  double lambda = 0.5;
  std::string format = "csv";
  std::string out;
  std::string config;  // consumed by the pre-parse injection below
  int jobs = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--lambda", c.lambda, "interaction decay rate, in (0,1)")->capture_default_str();
  sub->add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub->add_option("--out", c.out, "output path (default: stdout)");
  sub->add_option("--jobs", c.jobs, "worker threads for lattice enumeration")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--config", c.config,
                  "JSON file whose keys are long option names; flags override file values");
}

Emitter make_emitter(const std::string& command, const Common& c) {
  Emitter em;
  em.meta["command"] = command;
  em.meta["lambda"] = c.lambda;
  return em;
}

void push_complex(std::vector<ordered_json>& row, std::complex<double> v) {
  row.emplace_back(v.real());
  row.emplace_back(v.imag());
}

// ---------------------------------------------------------------------------
// subcommand runners
// ---------------------------------------------------------------------------

struct PartitionOpts {
  double beta = 1.0;
  int n = 8;
};

void run_partition(const Common& c, const PartitionOpts& o) {
  const kacbaker::ModelParams params(c.lambda);
  if (o.n < 1) throw std::domain_error("partition: --N must be at least 1");
  kacbaker::PartitionOptions popts;
  popts.jobs = c.jobs;

  Emitter em = make_emitter("partition", c);
  em.meta["beta"] = o.beta;
  em.meta["N"] = o.n;
  em.columns = {"n", "beta", "z_re", "z_im", "trace_re", "trace_im"};
  for (int n = 1; n <= o.n; ++n) {
    const auto z = kacbaker::partition_function_exact(n, o.beta, params, popts);
    const auto tr = kacbaker::exact_trace_ruelle_power(n, o.beta, params, popts);
    std::vector<ordered_json> row{n, o.beta};
    push_complex(row, z);
    push_complex(row, tr);
    em.rows.push_back(std::move(row));
  }
  emit(em.render(c.format), c.out);
}

struct TracesOpts {
  double beta = 1.0;
  int n_max = 3;
  int n_trunc = 80;
};

void run_traces(const Common& c, const TracesOpts& o) {
  const kacbaker::ModelParams params(c.lambda);
  if (o.n_max < 1) throw std::domain_error("traces: --n-max must be at least 1");
  kacbaker::PartitionOptions popts;
  popts.jobs = c.jobs;
  const kacbaker::Beta beta(o.beta);

  const auto comp = kacbaker::ruelle_matrix(beta, o.n_trunc, params);
  const bool have_integral = o.beta >= 0.0;
  kacbaker::OperatorMatrix quad{kacbaker::Basis::Hermite, beta, params, 0, {}};
  if (have_integral) quad = kacbaker::g_matrix_quadrature(beta, o.n_trunc, params).matrix;

  Emitter em = make_emitter("traces", c);
  em.meta["beta"] = o.beta;
  em.meta["n_max"] = o.n_max;
  em.meta["N"] = o.n_trunc;
  em.columns = {"n",        "beta_re",        "beta_im",        "exact_re",    "exact_im",
                "composition_re", "composition_im", "integral_re", "integral_im"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int n = 1; n <= o.n_max; ++n) {
    const auto exact = kacbaker::exact_trace_ruelle_power(n, beta, params, popts);
    const auto tc = kacbaker::truncated_trace_power(comp, n);
    std::vector<ordered_json> row{n};
    push_complex(row, beta);
    push_complex(row, exact);
    push_complex(row, tc);
    if (have_integral)
      push_complex(row, kacbaker::truncated_trace_power(quad, n));
    else
      push_complex(row, {nan, nan});
    em.rows.push_back(std::move(row));
  }
  emit(em.render(c.format), c.out);
}

struct SpectrumOpts {
  std::string op = "composition";
  double beta = 1.0;
  double beta_im = 0.0;
  int n_trunc = 0;  // 0: converged dimension (composition) / 60 (integral)
  int count = 0;    // 0: all
};

void run_spectrum(const Common& c, const SpectrumOpts& o) {
  const kacbaker::ModelParams params(c.lambda);
  const kacbaker::Beta beta(o.beta, o.beta_im);

  kacbaker::Spectrum spec;
  if (o.op == "composition") {
    if (o.n_trunc == 0)
      spec = kacbaker::spectrum_converged(beta, params);
    else
      spec = kacbaker::eigenvalues(kacbaker::ruelle_matrix(beta, o.n_trunc, params));
  } else {
    const int n = o.n_trunc == 0 ? 60 : o.n_trunc;
    spec = kacbaker::eigenvalues(kacbaker::g_matrix_quadrature(beta, n, params).matrix);
  }

  Emitter em = make_emitter("spectrum", c);
  em.meta["operator"] = o.op;
  em.meta["beta_re"] = o.beta;
  em.meta["beta_im"] = o.beta_im;
  em.meta["N"] = spec.N;
  em.columns = {"index", "rho_re", "rho_im", "abs"};
  const int limit = o.count > 0 ? std::min<int>(o.count, static_cast<int>(spec.eigenvalues.size()))
                                : static_cast<int>(spec.eigenvalues.size());
  for (int i = 0; i < limit; ++i) {
    const auto rho = spec.eigenvalues[static_cast<std::size_t>(i)];
    std::vector<ordered_json> row{i};
    push_complex(row, rho);
    row.emplace_back(std::abs(rho));
    em.rows.push_back(std::move(row));
  }
  emit(em.render(c.format), c.out);
}

struct BmatrixOpts {
  double beta = 1.0;
  double beta_im = 0.0;
  int n_trunc = 8;
};

void run_bmatrix(const Common& c, const BmatrixOpts& o) {
  const kacbaker::ModelParams params(c.lambda);
  const auto b = kacbaker::b_matrix(kacbaker::Beta(o.beta, o.beta_im), o.n_trunc, params);

  Emitter em = make_emitter("bmatrix", c);
  em.meta["beta_re"] = o.beta;
  em.meta["beta_im"] = o.beta_im;
  em.meta["N"] = o.n_trunc;
  em.columns = {"row", "col", "re", "im"};
  for (int r = 0; r < o.n_trunc; ++r)
    for (int col = 0; col < o.n_trunc; ++col) {
      std::vector<ordered_json> row{r, col};
      push_complex(row, b.entries(r, col));
      em.rows.push_back(std::move(row));
    }
  emit(em.render(c.format), c.out);
}

struct ZetaOpts {
  double beta = 1.0;
  double beta_im = 0.0;
  double z_re = 1.0;
  double z_im = 0.0;
  int n_trunc = 120;
};

void run_zeta(const Common& c, const ZetaOpts& o) {
  const kacbaker::ModelParams params(c.lambda);
  const auto ev = kacbaker::zeta_value({o.z_re, o.z_im}, kacbaker::Beta(o.beta, o.beta_im),
                                       o.n_trunc, params);

  Emitter em = make_emitter("zeta", c);
  em.meta["N"] = o.n_trunc;
  em.columns = {"beta_re", "beta_im", "z_re",    "z_im", "num_re", "num_im",
                "den_re",  "den_im",  "zeta_re", "zeta_im", "flag"};
  std::vector<ordered_json> row;
  push_complex(row, ev.beta);
  push_complex(row, ev.z);
  push_complex(row, ev.numerator);
  push_complex(row, ev.denominator);
  push_complex(row, ev.value);
  row.emplace_back(kacbaker::to_string(ev.flag));
  em.rows.push_back(std::move(row));
  emit(em.render(c.format), c.out);
}

struct ZerosOpts {
  bool line = false;
  double beta_min = -5.0;
  double beta_max = 5.0;
  double step = 0.05;
  int n_min = -2;
  int n_max = 2;
  int n_trunc = 0;  // 0: mode default (120 real axis, 80 line)
};

void run_zeros(const Common& c, const ZerosOpts& o) {
  const kacbaker::ModelParams params(c.lambda);
  const kacbaker::ZeroSearchResult res =
      o.line ? kacbaker::find_line_zeros(params, o.n_min, o.n_max,
                                         o.n_trunc == 0 ? 80 : o.n_trunc)
             : kacbaker::find_real_zeros(o.beta_min, o.beta_max, params,
                                         o.n_trunc == 0 ? 120 : o.n_trunc, o.step);
  for (const auto& note : res.notes) std::cerr << "note: " << note << "\n";

  Emitter em = make_emitter("zeros", c);
  em.meta["mode"] = o.line ? "line" : "real";
  if (o.line) {
    em.meta["n_min"] = o.n_min;
    em.meta["n_max"] = o.n_max;
  } else {
    em.meta["beta_min"] = res.range_min;
    em.meta["beta_max"] = res.range_max;
    em.meta["beta_step"] = res.step;
  }
  em.meta["N"] = res.N;
  em.columns = {"kind", "location_re", "location_im", "residual", "N"};
  for (const auto& z : res.zeros) {
    std::vector<ordered_json> row{z.kind};
    push_complex(row, z.location);
    row.emplace_back(z.residual);
    row.emplace_back(res.N);
    em.rows.push_back(std::move(row));
  }
  emit(em.render(c.format), c.out);
}

struct ScanOpts {
  double beta_min = 0.0;
  double beta_max = 1.0;
  double step = 0.1;
  double z_re = 1.0;
  double z_im = 0.0;
  int n_trunc = 120;
};

void run_scan(const Common& c, const ScanOpts& o) {
  const kacbaker::ModelParams params(c.lambda);
  if (!(o.step > 0.0)) throw std::domain_error("scan: --beta-step must be positive");
  if (!(o.beta_max >= o.beta_min))
    throw std::domain_error("scan: --beta-max must not be below --beta-min");
  const int npts = static_cast<int>((o.beta_max - o.beta_min) / o.step + 1e-9) + 1;
  if (npts > 100000) throw kacbaker::resource_limit_error("scan: grid exceeds 100000 points");
  const std::complex<double> z(o.z_re, o.z_im);

  Emitter em = make_emitter("scan", c);
  em.meta["beta_min"] = o.beta_min;
  em.meta["beta_max"] = o.beta_max;
  em.meta["beta_step"] = o.step;
  em.meta["z_re"] = o.z_re;
  em.meta["z_im"] = o.z_im;
  em.meta["N"] = o.n_trunc;
  em.columns = {"beta_re",    "beta_im",    "det_num_re", "det_num_im", "det_den_re",
                "det_den_im", "zeta_re",    "zeta_im",    "flag"};
  for (int i = 0; i < npts; ++i) {
    const double b = o.beta_min + i * o.step;
    const auto ev = kacbaker::zeta_value(z, kacbaker::Beta(b), o.n_trunc, params);
    std::vector<ordered_json> row;
    push_complex(row, ev.beta);
    push_complex(row, ev.numerator);
    push_complex(row, ev.denominator);
    push_complex(row, ev.value);
    row.emplace_back(kacbaker::to_string(ev.flag));
    em.rows.push_back(std::move(row));
  }
  emit(em.render(c.format), c.out);
}

struct VerifyOpts {
  std::vector<double> betas{0.0, 1.0};
  double tol = 0.0;
};

int run_verify(const Common& c, const VerifyOpts& o) {
  const kacbaker::ModelParams params(c.lambda);
  const auto report = kacbaker::run_invariant_suite(params, o.betas, o.tol);

  std::string text;
  if (c.format == "csv") {
    Emitter em;
    em.columns = {"check_name", "lhs_re", "lhs_im", "rhs_re", "rhs_im",
                  "abs_err",    "rel_err", "pass"};
    for (const auto& ck : report.checks) {
      std::vector<ordered_json> row{ck.name};
      push_complex(row, ck.lhs);
      push_complex(row, ck.rhs);
      row.emplace_back(ck.abs_err);
      row.emplace_back(ck.rel_err);
      row.emplace_back(ck.pass);
      em.rows.push_back(std::move(row));
    }
    text = em.render("csv");
  } else {
    ordered_json doc;
    doc["schema_version"] = 1;
    doc["command"] = "verify";
    doc["lambda"] = c.lambda;
    doc["betas"] = o.betas;
    doc["tol"] = o.tol;
    ordered_json checks = ordered_json::array();
    for (const auto& ck : report.checks) {
      ordered_json j;
      j["check_name"] = ck.name;
      j["lhs"] = {{"re", ck.lhs.real()}, {"im", ck.lhs.imag()}};
      j["rhs"] = {{"re", ck.rhs.real()}, {"im", ck.rhs.imag()}};
      j["abs_err"] = ck.abs_err;
      j["rel_err"] = ck.rel_err;
      j["pass"] = ck.pass;
      checks.push_back(std::move(j));
    }
    doc["checks"] = std::move(checks);
    doc["all_pass"] = report.all_pass();
    text = doc.dump(2) + "\n";
  }
  emit(text, c.out);

  int passed = 0;
  for (const auto& ck : report.checks) passed += ck.pass ? 1 : 0;
  std::cerr << "verify: " << passed << "/" << report.checks.size() << " checks passed\n";
  return report.all_pass() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// config file injection
// ---------------------------------------------------------------------------

std::string number_token(const nlohmann::json& v) {
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
  return std::string(buf);
}

/// Expands --config FILE into synthetic tokens placed right after the
/// subcommand name. Keys the user already passed on the command line are
/// skipped, which is what makes explicit flags override the file.
std::vector<std::string> inject_config(const CLI::App& app, std::vector<std::string> args) {
  std::size_t sub_pos = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!args[i].empty() && args[i][0] != '-') {
      sub_pos = i;
      break;
    }
  }
  if (sub_pos == args.size()) return args;

  std::string config_path;
  for (std::size_t i = sub_pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;

  const CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[sub_pos]);
  } catch (const CLI::OptionNotFound&) {
    return args;  // let the normal parse report the unknown subcommand
  }

  std::ifstream f(config_path);
  if (!f) throw io_error("cannot read config file: " + config_path);
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::domain_error("config file is not valid JSON: " + std::string(e.what()));
  }
  if (!cfg.is_object()) throw std::domain_error("config file must hold a JSON object");

  std::vector<std::string> known;
  for (const auto* opt : sub->get_options())
    for (const auto& name : opt->get_lnames()) known.push_back(name);

  std::vector<std::string> injected;
  for (const auto& item : cfg.items()) {
    const std::string& key = item.key();
    if (key == "config") continue;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::domain_error("config key not recognized by subcommand '" + args[sub_pos] +
                              "': " + key);
    bool user_set = false;
    for (std::size_t i = sub_pos + 1; i < args.size(); ++i)
      if (args[i] == "--" + key || args[i].rfind("--" + key + "=", 0) == 0) user_set = true;
    if (user_set) continue;

    const nlohmann::json& v = item.value();
    if (v.is_boolean()) {
      if (v.get<bool>()) injected.push_back("--" + key);
    } else if (v.is_array()) {
      for (const auto& elem : v) {
        injected.push_back("--" + key);
        injected.push_back(elem.is_string() ? elem.get<std::string>() : number_token(elem));
      }
    } else if (v.is_string()) {
      injected.push_back("--" + key);
      injected.push_back(v.get<std::string>());
    } else if (v.is_number()) {
      injected.push_back("--" + key);
      injected.push_back(number_token(v));
    } else {
      throw std::domain_error("config value for '" + key + "' must be scalar or array");
    }
  }

  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_pos) + 1, injected.begin(),
              injected.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_NUMERIC, "C");

  CLI::App app{"transfer operators, spectra and zeta-function zeros of the exponentially"
               " decaying Ising chain"};
  app.name("kacbaker");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common c_partition, c_traces, c_spectrum, c_bmatrix, c_zeta, c_zeros, c_scan, c_verify;
  PartitionOpts o_partition;
  TracesOpts o_traces;
  SpectrumOpts o_spectrum;
  BmatrixOpts o_bmatrix;
  ZetaOpts o_zeta;
  ZerosOpts o_zeros;
  ScanOpts o_scan;
  VerifyOpts o_verify;

  auto* partition = app.add_subcommand(
      "partition", "exact ring partition functions and the traces they pin down");
  add_common(partition, c_partition);
  partition->add_option("--beta", o_partition.beta, "inverse temperature")->capture_default_str();
  partition->add_option("--N", o_partition.n, "largest ring size (rows run n = 1..N)")
      ->capture_default_str();

  auto* traces = app.add_subcommand(
      "traces", "lattice traces against truncated traces of both operator realizations");
  add_common(traces, c_traces);
  traces->add_option("--beta", o_traces.beta, "inverse temperature")->capture_default_str();
  traces->add_option("--n-max", o_traces.n_max, "highest power n")->capture_default_str();
  traces->add_option("--N", o_traces.n_trunc, "matrix truncation")->capture_default_str();

  auto* spectrum =
      app.add_subcommand("spectrum", "eigenvalues of one operator realization, largest first");
  add_common(spectrum, c_spectrum);
  spectrum->add_option("--operator", o_spectrum.op, "which realization to diagonalize")
      ->check(CLI::IsMember({"composition", "integral"}))
      ->capture_default_str();
  spectrum->add_option("--beta", o_spectrum.beta, "inverse temperature (real part)")
      ->capture_default_str();
  spectrum->add_option("--beta-im", o_spectrum.beta_im, "imaginary part of beta")
      ->capture_default_str();
  spectrum->add_option("--N", o_spectrum.n_trunc,
                       "matrix truncation (0: converged dimension, integral default 60)")
      ->capture_default_str();
  spectrum->add_option("--count", o_spectrum.count, "emit only the top entries (0: all)")
      ->capture_default_str();

  auto* bmatrix =
      app.add_subcommand("bmatrix", "closed-form hermite-basis section of the integral operator");
  add_common(bmatrix, c_bmatrix);
  bmatrix->add_option("--beta", o_bmatrix.beta, "inverse temperature (real part)")
      ->capture_default_str();
  bmatrix->add_option("--beta-im", o_bmatrix.beta_im, "imaginary part of beta")
      ->capture_default_str();
  bmatrix->add_option("--N", o_bmatrix.n_trunc, "section dimension")->capture_default_str();

  auto* zeta = app.add_subcommand("zeta", "dynamical zeta value with numerator and denominator");
  add_common(zeta, c_zeta);
  zeta->add_option("--beta", o_zeta.beta, "inverse temperature (real part)")
      ->capture_default_str();
  zeta->add_option("--beta-im", o_zeta.beta_im, "imaginary part of beta")->capture_default_str();
  zeta->add_option("--z-re", o_zeta.z_re, "real part of z")->capture_default_str();
  zeta->add_option("--z-im", o_zeta.z_im, "imaginary part of z")->capture_default_str();
  zeta->add_option("--N", o_zeta.n_trunc, "matrix truncation")->capture_default_str();

  auto* zeros = app.add_subcommand(
      "zeros", "zero/pole search: real axis by default, --line for the half-period line");
  add_common(zeros, c_zeros);
  zeros->add_flag("--line", o_zeros.line,
                  "search along the line Re beta = ln 2 (lambda = 1/2 only)");
  zeros->add_option("--beta-min", o_zeros.beta_min, "real-axis interval start")
      ->capture_default_str();
  zeros->add_option("--beta-max", o_zeros.beta_max, "real-axis interval end")
      ->capture_default_str();
  zeros->add_option("--beta-step", o_zeros.step, "real-axis grid step")->capture_default_str();
  zeros->add_option("--n-min", o_zeros.n_min, "first line index")->capture_default_str();
  zeros->add_option("--n-max", o_zeros.n_max, "last line index")->capture_default_str();
  zeros->add_option("--N", o_zeros.n_trunc, "matrix truncation (0: mode default)")
      ->capture_default_str();

  auto* scan = app.add_subcommand(
      "scan", "determinants and zeta over a real beta grid at fixed z");
  add_common(scan, c_scan);
  scan->add_option("--beta-min", o_scan.beta_min, "grid start")->capture_default_str();
  scan->add_option("--beta-max", o_scan.beta_max, "grid end")->capture_default_str();
  scan->add_option("--beta-step", o_scan.step, "grid step")->capture_default_str();
  scan->add_option("--z-re", o_scan.z_re, "real part of z")->capture_default_str();
  scan->add_option("--z-im", o_scan.z_im, "imaginary part of z")->capture_default_str();
  scan->add_option("--N", o_scan.n_trunc, "matrix truncation")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "run the cross-check suite and report each row");
  c_verify.format = "json";
  add_common(verify, c_verify);
  verify
      ->add_option("--beta", o_verify.betas,
                   "inverse temperatures to verify at (repeatable; default 0 1)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  verify->add_option("--tol", o_verify.tol, "override every per-check tolerance (0: defaults)")
      ->capture_default_str();

  std::vector<std::string> args(argv + 1, argv + argc);
  int rc = kExitOk;
  try {
    args = inject_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (partition->parsed()) run_partition(c_partition, o_partition);
    if (traces->parsed()) run_traces(c_traces, o_traces);
    if (spectrum->parsed()) run_spectrum(c_spectrum, o_spectrum);
    if (bmatrix->parsed()) run_bmatrix(c_bmatrix, o_bmatrix);
    if (zeta->parsed()) run_zeta(c_zeta, o_zeta);
    if (zeros->parsed()) run_zeros(c_zeros, o_zeros);
    if (scan->parsed()) run_scan(c_scan, o_scan);
    if (verify->parsed()) rc = run_verify(c_verify, o_verify);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const kacbaker::resource_limit_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return rc;
}
