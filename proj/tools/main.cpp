/*
 * Copyright 2026 The coordcap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// coordcap command line front-end. Subcommands dispatch to the library and
// emit a RunRecord (command, resolved config, version, timestamp, duration,
// result) as JSON on standard output. --out writes the result payload alone,
// so reruns of the same config produce byte-identical files.
//
// Exit codes:
//   0  success (including feasible=false results)
//   2  usage error (unknown flag, missing required option)
//   3  input error (unreadable file, malformed JSON, invalid values)
//   4  precondition violation (operation outside its domain)
//   5  resource guard tripped
//   10 internal error

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coordcap/coordcap.hpp"

namespace {

using coordcap::io::InputError;
using coordcap::io::ojson;

/// Arguments documented as PATH|inline: anything that starts with a JSON
/// bracket is parsed in place, anything else is read as a file.
ojson load_doc(const std::string& arg, const std::string& what) {
  const std::size_t first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (arg[first] == '[' || arg[first] == '{'))
    return coordcap::io::parse_json_text(arg, what);
  return coordcap::io::parse_json_file(arg);
}

coordcap::CompoundChannel channel_from_arg(const std::string& arg) {
  return coordcap::io::channel_from_json(load_doc(arg, "--channel"), "--channel");
}

coordcap::Distribution distribution_from_arg(const std::string& arg, const std::string& what) {
  ojson j = load_doc(arg, what);
  if (j.is_object() && j.contains("target")) j = j["target"];
  return coordcap::io::distribution_from_json(j, what);
}

/// Per-state target list; a single distribution broadcasts to every state.
std::vector<coordcap::Distribution> targets_from_arg(const std::string& arg,
                                                     std::size_t state_count,
                                                     const std::string& what) {
  ojson j = load_doc(arg, what);
  if (j.is_object() && j.contains("targets")) j = j["targets"];
  if (!j.is_array() || j.empty()) throw InputError(what + ": expected a non-empty array");
  std::vector<coordcap::Distribution> out;
  if (j[0].is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(
          coordcap::io::distribution_from_json(j[i], what + "[" + std::to_string(i) + "]"));
  } else {
    out.push_back(coordcap::io::distribution_from_json(j, what));
  }
  if (out.size() == 1 && state_count > 1) out.resize(state_count, out.front());
  if (out.size() != state_count)
    throw InputError(what + ": expected one target per state (" + std::to_string(state_count) +
                     "), got " + std::to_string(out.size()));
  return out;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string piece = text.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      const double v = std::stod(piece, &used);
      if (used != piece.size()) throw std::invalid_argument("trailing characters");
      out.push_back(v);
    } catch (const std::exception&) {
      throw InputError(what + ": cannot parse \"" + piece + "\" as a number");
    }
    pos = comma + 1;
    if (comma == text.size()) break;
  }
  if (out.empty()) throw InputError(what + ": empty list");
  return out;
}

/// --delta LIST: comma-separated values; a single value broadcasts.
std::vector<double> deltas_from_arg(const std::string& arg, std::size_t state_count) {
  std::vector<double> d = parse_number_list(arg, "--delta");
  if (d.size() == 1 && state_count > 1) d.resize(state_count, d.front());
  if (d.size() != state_count)
    throw InputError("--delta: expected one value per state (" + std::to_string(state_count) +
                     "), got " + std::to_string(d.size()));
  return d;
}

/// --delta-grid start:stop:step (inclusive) or an explicit comma list.
std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_number_list(text, "--delta-grid");
  std::vector<double> parts;
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t colon = (i < 2) ? text.find(':', pos) : std::string::npos;
    const std::string piece =
        text.substr(pos, (colon == std::string::npos ? text.size() : colon) - pos);
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(piece, &used));
      if (used != piece.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw InputError("--delta-grid: cannot parse \"" + piece + "\"");
    }
    if (i < 2) {
      if (colon == std::string::npos) throw InputError("--delta-grid: expected start:stop:step");
      pos = colon + 1;
    }
  }
  const double start = parts[0], stop = parts[1], step = parts[2];
  if (step <= 0.0) {
    if (start == stop) return {start};
    throw InputError("--delta-grid: step must be > 0");
  }
  if (stop < start) throw InputError("--delta-grid: stop must be >= start");
  std::vector<double> grid;
  const std::int64_t count =
      static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (std::int64_t i = 0; i < count; ++i) grid.push_back(start + static_cast<double>(i) * step);
  return grid;
}

coordcap::Sequence parse_sequence(const std::string& text, std::size_t alphabet_size) {
  coordcap::Sequence seq;
  for (double v : parse_number_list(text, "--sequence")) {
    if (v < 0 || v != std::floor(v) || v >= static_cast<double>(alphabet_size))
      throw InputError("--sequence: symbols must be integers in [0, " +
                       std::to_string(alphabet_size) + ")");
    seq.push_back(static_cast<coordcap::Symbol>(v));
  }
  return seq;
}

coordcap::JointDistribution joint_from_arg(const std::string& arg, const std::string& what) {
  ojson j = load_doc(arg, what);
  if (j.is_object() && j.contains("joint")) j = j["joint"];
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw InputError(what + ": expected a row-major matrix (array of arrays)");
  const std::size_t nx = j.size();
  const std::size_t ny = j[0].size();
  std::vector<double> flat;
  flat.reserve(nx * ny);
  for (std::size_t a = 0; a < nx; ++a) {
    const std::vector<double> row =
        coordcap::io::number_array(j[a], what + "[" + std::to_string(a) + "]");
    if (row.size() != ny) throw InputError(what + ": ragged matrix rows");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  try {
    return coordcap::JointDistribution(nx, ny, flat);
  } catch (const std::invalid_argument& e) {
    throw InputError(what + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open output file: " + path);
  out << text;
  if (!out) throw InputError("failed writing output file: " + path);
}

/// Emits the RunRecord on stdout and, when requested, the bare payload file.
void emit(const std::string& command, const ojson& config, const ojson& payload,
          std::chrono::steady_clock::time_point t0, const std::string& out_path) {
  coordcap::io::RunRecord rec;
  rec.command = command;
  rec.config = config;
  rec.result = payload;
  rec.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << rec.to_json().dump(2) << "\n";
  if (!out_path.empty()) write_file(out_path, payload.dump(2) + "\n");
}

ojson solver_config(const coordcap::CompoundChannel& ch, const coordcap::SolverOptions& opts) {
  ojson config;
  config["channel"] = coordcap::io::to_json(ch);
  config["tol"] = opts.tol;
  config["max_iterations"] = opts.max_iterations;
  return config;
}

int fail(const char* type, const std::string& message, int code) {
  ojson err;
  err["error"]["type"] = type;
  err["error"]["message"] = message;
  std::cerr << err.dump(2) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "coordcap: communication capacity under interference constraints for compound "
      "channels, with a matching random-coding simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(coordcap::kVersion));

  // Shared option storage. Only the options registered on the chosen
  // subcommand are read.
  std::string channel_path, targets_arg, target_arg, delta_arg, out_path;
  std::string input_arg, joint_arg, qy_arg, sequence_arg, format = "json";
  std::string rate_unit = "bits";
  std::vector<std::string> grid_args;
  double tol = 1e-6, epsilon = 0.2, rate = 0.0, rate_slack = 0.02;
  std::int64_t max_iters = 100000, blocklength = 0, trials = 0, lattice_n = 0;
  std::int64_t max_codebook_symbols = 10'000'000;
  std::uint64_t seed = 1;
  int threads = 0;
  bool shared_codebook = false;

  const auto add_channel = [&](CLI::App* cmd) {
    cmd->add_option("--channel", channel_path, "Channel spec, file or inline JSON")->required();
  };
  const auto add_solver_opts = [&](CLI::App* cmd) {
    cmd->add_option("--tol", tol, "Certified optimality gap target in nats (default 1e-6)");
    cmd->add_option("--max-iters", max_iters, "Solver iteration cap (default 100000)");
  };
  const auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "Write the result payload alone to this file");
  };
  const auto add_threads = [&](CLI::App* cmd) {
    cmd->add_option("--threads", threads, "Worker threads, 0 = machine parallelism")
        ->envname("COORDCAP_THREADS");
  };

  CLI::App* c_capacity = app.add_subcommand(
      "capacity", "Max-min rate with per-state interference targets met exactly");
  add_channel(c_capacity);
  c_capacity->add_option("--targets", targets_arg,
                         "Per-state target distributions, file or inline JSON; a single "
                         "distribution broadcasts to all states")
      ->required();
  add_solver_opts(c_capacity);
  add_out(c_capacity);

  CLI::App* c_adaptive = app.add_subcommand(
      "adaptive", "Max-min rate with one common target met within per-state budgets");
  add_channel(c_adaptive);
  c_adaptive->add_option("--target", target_arg, "Common target distribution, file or inline JSON")
      ->required();
  c_adaptive
      ->add_option("--delta", delta_arg,
                   "Per-state variational-distance budgets, comma separated; a single value "
                   "broadcasts")
      ->required();
  add_solver_opts(c_adaptive);
  add_out(c_adaptive);

  CLI::App* c_feasible =
      app.add_subcommand("feasible", "Feasibility of the constraint polytope plus a witness");
  add_channel(c_feasible);
  c_feasible->add_option("--targets", targets_arg, "Per-state targets (exact-match problem)");
  c_feasible->add_option("--target", target_arg, "Common target (budget problem)");
  c_feasible->add_option("--delta", delta_arg, "Budgets for --target (default 0)");
  add_out(c_feasible);

  CLI::App* c_sweep = app.add_subcommand(
      "sweep", "Capacity across a grid of budget values for a common target");
  add_channel(c_sweep);
  c_sweep->add_option("--target", target_arg, "Common target distribution")->required();
  c_sweep
      ->add_option("--delta-grid", grid_args,
                   "Grid per state as start:stop:step or a comma list; give once to share "
                   "across states or once per state")
      ->required();
  add_solver_opts(c_sweep);
  add_threads(c_sweep);
  c_sweep->add_option("--format", format, "json (default) or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  add_out(c_sweep);

  CLI::App* c_simulate = app.add_subcommand(
      "simulate", "Monte Carlo random-coding trials with a joint-typicality decoder");
  add_channel(c_simulate);
  c_simulate->add_option("--input", input_arg, "Codeword distribution, file or inline JSON")
      ->required();
  c_simulate->add_option("--rate", rate, "Coding rate (see --rate-unit)")->required();
  c_simulate->add_option("--rate-unit", rate_unit, "bits (default) or nats")
      ->check(CLI::IsMember({"bits", "nats"}));
  c_simulate->add_option("--blocklength", blocklength, "Codeword length n")->required();
  c_simulate->add_option("--trials", trials, "Trials per channel state")->required();
  c_simulate->add_option("--seed", seed, "RNG seed (default 1)");
  c_simulate->add_option("--epsilon", epsilon, "Decoder typicality width (default 0.2)");
  c_simulate->add_option("--target", target_arg, "Common interference target to score");
  c_simulate->add_option("--targets", targets_arg, "Per-state interference targets to score");
  c_simulate->add_option("--delta", delta_arg, "Budget annotation per state (with --target)");
  c_simulate->add_flag("--shared-codebook", shared_codebook,
                       "Reuse one codebook across trials instead of drawing fresh ones");
  c_simulate->add_option("--rate-slack", rate_slack,
                         "Rate backoff when sizing the codebook (default 0.02 nats)");
  c_simulate->add_option("--max-codebook-symbols", max_codebook_symbols,
                         "Explicit-codebook memory guard (default 1e7 symbols)");
  add_threads(c_simulate);
  add_out(c_simulate);

  CLI::App* c_bounds = app.add_subcommand(
      "bounds", "Typical-set size and probability bounds for a joint distribution");
  c_bounds->add_option("--joint", joint_arg, "Joint distribution matrix, file or inline JSON")
      ->required();
  c_bounds->add_option("--blocklength", blocklength, "Sequence length n")->required();
  c_bounds->add_option("--epsilon", epsilon, "Typicality width")->required();
  c_bounds->add_option("--sequence", sequence_arg,
                       "Input sequence (comma-separated symbols) for conditional bounds");
  c_bounds->add_option("--qy", qy_arg, "Output distribution for the cross-probability bound");
  add_out(c_bounds);

  CLI::App* c_oracle = app.add_subcommand(
      "oracle", "Exhaustive lattice search over denominator-n input types");
  add_channel(c_oracle);
  c_oracle->add_option("--targets", targets_arg, "Per-state targets (exact-match problem)");
  c_oracle->add_option("--target", target_arg, "Common target (budget problem)");
  c_oracle->add_option("--delta", delta_arg, "Budgets for --target");
  c_oracle->add_option("--lattice-n", lattice_n, "Type denominator n")->required();
  add_threads(c_oracle);
  add_out(c_oracle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (c_capacity->parsed()) {
      coordcap::CompoundChannel ch = channel_from_arg(channel_path);
      coordcap::MultipleProblem problem(
          ch, targets_from_arg(targets_arg, ch.num_states(), "--targets"));
      const coordcap::SolverOptions opts{tol, max_iters};
      const coordcap::CapacityResult result = coordcap::capacity_multiple(problem, opts);
      ojson config = solver_config(ch, opts);
      ojson tj = ojson::array();
      for (const auto& q : problem.targets) tj.push_back(coordcap::io::to_json(q));
      config["targets"] = std::move(tj);
      emit("capacity", config, coordcap::io::to_json(result), t0, out_path);
    } else if (c_adaptive->parsed()) {
      coordcap::CompoundChannel ch = channel_from_arg(channel_path);
      coordcap::AdaptiveProblem problem(ch, distribution_from_arg(target_arg, "--target"),
                                        deltas_from_arg(delta_arg, ch.num_states()));
      const coordcap::SolverOptions opts{tol, max_iters};
      const coordcap::CapacityResult result = coordcap::capacity_adaptive(problem, opts);
      ojson config = solver_config(ch, opts);
      config["target"] = coordcap::io::to_json(problem.target);
      config["deltas"] = problem.deltas;
      emit("adaptive", config, coordcap::io::to_json(result), t0, out_path);
    } else if (c_feasible->parsed()) {
      coordcap::CompoundChannel ch = channel_from_arg(channel_path);
      ojson config;
      config["channel"] = coordcap::io::to_json(ch);
      coordcap::FeasibilityResult result{};
      if (!targets_arg.empty() == !target_arg.empty())
        throw InputError("feasible: give exactly one of --targets / --target");
      if (!targets_arg.empty()) {
        coordcap::MultipleProblem problem(
            ch, targets_from_arg(targets_arg, ch.num_states(), "--targets"));
        result = coordcap::feasibility_multiple(problem);
        ojson tj = ojson::array();
        for (const auto& q : problem.targets) tj.push_back(coordcap::io::to_json(q));
        config["targets"] = std::move(tj);
      } else {
        std::vector<double> deltas(ch.num_states(), 0.0);
        if (!delta_arg.empty()) deltas = deltas_from_arg(delta_arg, ch.num_states());
        coordcap::AdaptiveProblem problem(ch, distribution_from_arg(target_arg, "--target"),
                                          deltas);
        result = coordcap::feasibility_adaptive(problem);
        config["target"] = coordcap::io::to_json(problem.target);
        config["deltas"] = problem.deltas;
      }
      emit("feasible", config, coordcap::io::to_json(result), t0, out_path);
    } else if (c_sweep->parsed()) {
      coordcap::CompoundChannel ch = channel_from_arg(channel_path);
      const coordcap::Distribution target = distribution_from_arg(target_arg, "--target");
      if (grid_args.size() != 1 && grid_args.size() != ch.num_states())
        throw InputError("--delta-grid: give one grid or one per state");
      std::vector<std::vector<double>> axes;
      for (const auto& g : grid_args) axes.push_back(parse_grid(g));
      while (axes.size() < ch.num_states()) axes.push_back(axes.front());
      // Cartesian product in row-major order, last axis fastest.
      std::vector<std::vector<double>> cells{{}};
      for (const auto& axis : axes) {
        std::vector<std::vector<double>> next;
        next.reserve(cells.size() * axis.size());
        for (const auto& prefix : cells)
          for (double v : axis) {
            std::vector<double> row = prefix;
            row.push_back(v);
            next.push_back(std::move(row));
          }
        cells = std::move(next);
      }
      const coordcap::SolverOptions opts{tol, max_iters};
      const std::vector<coordcap::SweepCell> result =
          coordcap::region_sweep(ch, target, cells, opts, threads);
      if (format == "csv") {
        const std::string csv = coordcap::io::sweep_to_csv(result);
        std::cout << csv;
        if (!out_path.empty()) write_file(out_path, csv);
      } else {
        ojson config = solver_config(ch, opts);
        config["target"] = coordcap::io::to_json(target);
        config["delta_grid"] = cells;
        config["threads"] = threads;
        emit("sweep", config, coordcap::io::to_json(result), t0, out_path);
      }
    } else if (c_simulate->parsed()) {
      coordcap::CompoundChannel ch = channel_from_arg(channel_path);
      const double rate_nats = rate_unit == "bits" ? rate * std::numbers::ln2 : rate;
      coordcap::SimConfig cfg(ch, distribution_from_arg(input_arg, "--input"), rate_nats,
                              blocklength, trials, seed);
      cfg.epsilon = epsilon;
      cfg.fresh_codebook = !shared_codebook;
      cfg.rate_slack = rate_slack;
      cfg.max_codebook_symbols = max_codebook_symbols;
      cfg.threads = threads;
      if (!target_arg.empty()) cfg.target = distribution_from_arg(target_arg, "--target");
      if (!targets_arg.empty())
        cfg.state_targets = targets_from_arg(targets_arg, ch.num_states(), "--targets");
      if (!delta_arg.empty()) cfg.deltas = deltas_from_arg(delta_arg, ch.num_states());
      const coordcap::SimReport report = coordcap::run_trials(cfg);
      ojson config;
      config["channel"] = coordcap::io::to_json(ch);
      config["input"] = coordcap::io::to_json(cfg.input_pmf);
      config["rate_nats"] = rate_nats;
      config["blocklength"] = blocklength;
      config["trials"] = trials;
      config["seed"] = seed;
      config["epsilon"] = epsilon;
      config["fresh_codebook"] = cfg.fresh_codebook;
      config["rate_slack"] = rate_slack;
      config["max_codebook_symbols"] = max_codebook_symbols;
      config["threads"] = threads;
      if (cfg.target) config["target"] = coordcap::io::to_json(*cfg.target);
      if (cfg.state_targets) {
        ojson tj = ojson::array();
        for (const auto& q : *cfg.state_targets) tj.push_back(coordcap::io::to_json(q));
        config["state_targets"] = std::move(tj);
      }
      if (cfg.deltas) config["deltas"] = *cfg.deltas;
      emit("simulate", config, coordcap::io::to_json(report), t0, out_path);
    } else if (c_bounds->parsed()) {
      const coordcap::JointDistribution joint = joint_from_arg(joint_arg, "--joint");
      const coordcap::TypicalityParams params{epsilon, blocklength};
      ojson config;
      config["joint"] = joint.probs();
      config["nx"] = joint.nx();
      config["ny"] = joint.ny();
      config["blocklength"] = blocklength;
      config["epsilon"] = epsilon;
      ojson payload;
      payload["size_bounds"] =
          coordcap::io::to_json(coordcap::jointly_typical_set_size_bounds(joint, params));
      if (!sequence_arg.empty()) {
        const coordcap::Sequence x = parse_sequence(sequence_arg, joint.nx());
        config["sequence"] = x;
        payload["conditional_sequence_probability"] = coordcap::io::to_json(
            coordcap::conditional_sequence_probability_bounds(joint, x, params));
        payload["conditional_set_probability"] =
            coordcap::io::to_json(coordcap::conditional_set_probability_bounds(joint, x, params));
        if (!qy_arg.empty()) {
          const coordcap::Distribution qy = distribution_from_arg(qy_arg, "--qy");
          config["q_y"] = coordcap::io::to_json(qy);
          payload["cross_probability"] =
              coordcap::io::to_json(coordcap::cross_probability_bound(joint, qy, x, params));
        }
      } else if (!qy_arg.empty()) {
        throw InputError("bounds: --qy requires --sequence");
      }
      emit("bounds", config, payload, t0, out_path);
    } else if (c_oracle->parsed()) {
      coordcap::CompoundChannel ch = channel_from_arg(channel_path);
      ojson config;
      config["channel"] = coordcap::io::to_json(ch);
      config["lattice_n"] = lattice_n;
      config["threads"] = threads;
      std::optional<double> best;
      if (!targets_arg.empty() == !target_arg.empty())
        throw InputError("oracle: give exactly one of --targets / --target");
      if (!targets_arg.empty()) {
        coordcap::MultipleProblem problem(
            ch, targets_from_arg(targets_arg, ch.num_states(), "--targets"));
        ojson tj = ojson::array();
        for (const auto& q : problem.targets) tj.push_back(coordcap::io::to_json(q));
        config["targets"] = std::move(tj);
        best = coordcap::brute_force_capacity(problem, lattice_n, threads);
      } else {
        std::vector<double> deltas(ch.num_states(), 0.0);
        if (!delta_arg.empty()) deltas = deltas_from_arg(delta_arg, ch.num_states());
        coordcap::AdaptiveProblem problem(ch, distribution_from_arg(target_arg, "--target"),
                                          deltas);
        config["target"] = coordcap::io::to_json(problem.target);
        config["deltas"] = problem.deltas;
        best = coordcap::brute_force_capacity(problem, lattice_n, threads);
      }
      ojson payload;
      payload["lattice_n"] = lattice_n;
      payload["feasible"] = best.has_value();
      payload["rate_nats"] = best ? ojson(*best) : ojson(nullptr);
      payload["rate_bits"] = best ? ojson(coordcap::nats_to_bits(*best)) : ojson(nullptr);
      emit("oracle", config, payload, t0, out_path);
    }
  } catch (const coordcap::ResourceLimitError& e) {
    return fail("resource_limit", e.what(), 5);
  } catch (const InputError& e) {
    return fail("input", e.what(), 3);
  } catch (const std::domain_error& e) {
    return fail("precondition", e.what(), 4);
  } catch (const std::invalid_argument& e) {
    return fail("input", e.what(), 3);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 10);
  }
  return 0;
}
