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

#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coordcap/sim.hpp"
#include "coordcap/solver.hpp"
#include "coordcap/typical.hpp"
#include "coordcap/types.hpp"
#include "coordcap/version.hpp"

namespace coordcap::io {

// Insertion-ordered JSON keeps emitted documents stable and readable.
using ojson = nlohmann::ordered_json;

/// Thrown for malformed or semantically invalid input documents; the message
/// carries the file and location context.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline ojson parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file: " + path);
  try {
    return ojson::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline ojson parse_json_text(const std::string& text, const std::string& where) {
  try {
    return ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(where + ": " + e.what());
  }
}

namespace detail {

inline double number_at(const ojson& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  return j.get<double>();
}

}  // namespace detail

inline std::vector<double> number_array(const ojson& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(detail::number_at(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline Distribution distribution_from_json(const ojson& j, const std::string& where) {
  try {
    return Distribution(number_array(j, where));
  } catch (const std::invalid_argument& e) {
    throw InputError(where + ": " + e.what());
  }
}

/// Alphabets come either as a size or as an array of labels.
inline Alphabet alphabet_from_json(const ojson& j, const std::string& where) {
  if (j.is_number_unsigned() || j.is_number_integer()) {
    const auto k = j.get<std::int64_t>();
    if (k < 1) throw InputError(where + ": alphabet size must be >= 1");
    return Alphabet(static_cast<std::size_t>(k));
  }
  if (j.is_array()) {
    std::vector<std::string> labels;
    labels.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_string())
        throw InputError(where + "[" + std::to_string(i) + "]: expected a string label");
      labels.push_back(j[i].get<std::string>());
    }
    try {
      return Alphabet(labels.size(), labels);
    } catch (const std::invalid_argument& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  throw InputError(where + ": expected an integer size or an array of labels");
}

inline Kernel kernel_from_json(const ojson& j, std::size_t input_size, std::size_t output_size,
                               const std::string& where) {
  if (!j.is_array() || j.size() != input_size)
    throw InputError(where + ": expected " + std::to_string(input_size) + " rows");
  std::vector<Distribution> rows;
  rows.reserve(input_size);
  for (std::size_t a = 0; a < input_size; ++a) {
    Distribution row =
        distribution_from_json(j[a], where + "[" + std::to_string(a) + "]");
    if (row.size() != output_size)
      throw InputError(where + "[" + std::to_string(a) + "]: expected " +
                       std::to_string(output_size) + " entries");
    rows.push_back(std::move(row));
  }
  return Kernel(std::move(rows));
}

/// Channel document shape:
///   {
///     "alphabet_x": 2 | ["a","b"],
///     "alphabet_y": ...,
///     "alphabet_z": ...,
///     "states": [ {"kernel_y": [[...],...], "kernel_z": [[...],...]}, ... ]
///   }
inline CompoundChannel channel_from_json(const ojson& j, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected a channel object");
  for (const char* key : {"alphabet_x", "alphabet_y", "alphabet_z", "states"})
    if (!j.contains(key)) throw InputError(where + ": missing key \"" + key + "\"");
  Alphabet ax = alphabet_from_json(j["alphabet_x"], where + ".alphabet_x");
  Alphabet ay = alphabet_from_json(j["alphabet_y"], where + ".alphabet_y");
  Alphabet az = alphabet_from_json(j["alphabet_z"], where + ".alphabet_z");
  const ojson& js = j["states"];
  if (!js.is_array() || js.empty())
    throw InputError(where + ".states: expected a non-empty array");
  std::vector<ChannelState> states;
  states.reserve(js.size());
  for (std::size_t s = 0; s < js.size(); ++s) {
    const std::string sw = where + ".states[" + std::to_string(s) + "]";
    if (!js[s].is_object() || !js[s].contains("kernel_y") || !js[s].contains("kernel_z"))
      throw InputError(sw + ": expected an object with kernel_y and kernel_z");
    states.push_back(ChannelState{
        kernel_from_json(js[s]["kernel_y"], ax.size(), ay.size(), sw + ".kernel_y"),
        kernel_from_json(js[s]["kernel_z"], ax.size(), az.size(), sw + ".kernel_z")});
  }
  try {
    return CompoundChannel(std::move(ax), std::move(ay), std::move(az), std::move(states));
  } catch (const std::invalid_argument& e) {
    throw InputError(where + ": " + e.what());
  }
}

inline CompoundChannel load_channel(const std::string& path) {
  return channel_from_json(parse_json_file(path), path);
}

// ---------------------------------------------------------------------------
// Serialization. NaN and infinities become JSON null (the library default),
// finite doubles round-trip exactly.
// ---------------------------------------------------------------------------

inline ojson to_json(const Distribution& d) { return ojson(d.probs()); }

inline ojson kernel_matrix_json(const Kernel& k) {
  ojson rows = ojson::array();
  for (std::size_t a = 0; a < k.input_size(); ++a) rows.push_back(to_json(k.row(a)));
  return rows;
}

inline ojson alphabet_to_json(const Alphabet& a) {
  ojson labels = ojson::array();
  for (std::size_t i = 0; i < a.size(); ++i) labels.push_back(a.label(i));
  return labels;
}

inline ojson to_json(const CompoundChannel& ch) {
  ojson j;
  j["alphabet_x"] = alphabet_to_json(ch.alphabet_x());
  j["alphabet_y"] = alphabet_to_json(ch.alphabet_y());
  j["alphabet_z"] = alphabet_to_json(ch.alphabet_z());
  ojson states = ojson::array();
  for (const auto& st : ch.states()) {
    ojson sj;
    sj["kernel_y"] = kernel_matrix_json(st.kernel_y);
    sj["kernel_z"] = kernel_matrix_json(st.kernel_z);
    states.push_back(std::move(sj));
  }
  j["states"] = std::move(states);
  return j;
}

inline ojson to_json(const FeasibilityResult& r) {
  ojson j;
  j["feasible"] = r.feasible;
  j["min_entry"] = r.min_entry;
  j["witness"] = r.witness ? to_json(*r.witness) : ojson(nullptr);
  return j;
}

inline ojson to_json(const CapacityResult& r) {
  ojson j;
  j["feasible"] = r.feasible;
  j["rate_nats"] = r.rate_nats ? ojson(*r.rate_nats) : ojson(nullptr);
  j["rate_bits"] = r.rate_bits ? ojson(*r.rate_bits) : ojson(nullptr);
  j["optimizer"] = r.optimizer ? to_json(*r.optimizer) : ojson(nullptr);
  j["per_state_mi_nats"] = r.per_state_mi;
  j["active_states"] = r.active_states;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["duality_gap_estimate"] = r.duality_gap_estimate;
  j["boundary_smoothing_used"] = r.boundary_smoothing_used;
  j["concavity_ok"] = r.concavity_ok;
  return j;
}

inline ojson to_json(const std::vector<SweepCell>& cells) {
  ojson arr = ojson::array();
  for (const auto& cell : cells) {
    ojson j;
    j["deltas"] = cell.deltas;
    j["result"] = to_json(cell.result);
    arr.push_back(std::move(j));
  }
  return arr;
}

inline const char* tier_name(TypicalityTier tier) {
  return tier == TypicalityTier::strict ? "strict" : "base";
}

inline ojson to_json(const BoundReport& b) {
  ojson j;
  j["lower"] = b.lower;
  j["upper"] = b.upper;
  j["log_lower"] = b.log_lower;
  j["log_upper"] = b.log_upper;
  j["epsilon_m"] = b.epsilon_m;
  j["delta_t"] = b.delta_t;
  j["vacuous"] = b.vacuous;
  j["tier"] = tier_name(b.tier);
  return j;
}

inline const char* mode_name(CodebookMode m) {
  switch (m) {
    case CodebookMode::fresh_explicit: return "fresh_explicit";
    case CodebookMode::fresh_ensemble: return "fresh_ensemble";
    case CodebookMode::shared_explicit: return "shared_explicit";
  }
  return "unknown";
}

inline ojson to_json(const StateSimStats& s) {
  ojson j;
  j["state"] = s.state;
  j["trials"] = s.trials;
  j["errors"] = s.errors;
  j["error_rate"] = s.error_rate;
  j["wilson_low"] = s.wilson_low;
  j["wilson_high"] = s.wilson_high;
  j["err_input_atypical"] = s.err_input_atypical;
  j["err_confusion"] = s.err_confusion;
  j["mean_v"] = s.mean_v;
  j["v_std_error"] = s.v_std_error;
  // NaN means "no budget was attached to this run"; emit an honest null.
  if (std::isnan(s.delta_checked)) {
    j["delta_checked"] = nullptr;
  } else {
    j["delta_checked"] = s.delta_checked;
  }
  j["v_histogram"] = s.v_histogram;
  return j;
}

inline ojson to_json(const SimReport& r) {
  ojson j;
  j["mode"] = mode_name(r.mode);
  j["blocklength"] = r.blocklength;
  j["trials_per_state"] = r.trials_per_state;
  j["seed"] = r.seed;
  j["rate_nats"] = r.rate_nats;
  j["rate_slack"] = r.rate_slack;
  j["epsilon"] = r.epsilon;
  j["message_count"] = r.message_count;
  j["log_message_count"] = r.log_message_count;
  j["max_state_error"] = r.max_state_error;
  ojson arr = ojson::array();
  for (const auto& s : r.per_state) arr.push_back(to_json(s));
  j["per_state"] = std::move(arr);
  return j;
}

inline ojson to_json(const CoordinationCheckReport& r) {
  ojson j;
  j["thetas"] = r.thetas;
  ojson pts = ojson::array();
  for (const auto& p : r.points) {
    ojson pj;
    pj["n"] = p.n;
    pj["mean_v"] = p.mean_v;
    pj["exceed_prob"] = p.exceed_prob;
    pts.push_back(std::move(pj));
  }
  j["points"] = std::move(pts);
  return j;
}

/// Six-significant-digit CSV for region sweeps; one row per grid cell.
inline std::string sweep_to_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  if (cells.empty()) return "";
  const std::size_t s_count = cells.front().deltas.size();
  for (std::size_t s = 0; s < s_count; ++s) out << "delta_" << s << ",";
  out << "feasible,rate_nats,rate_bits,iterations,converged,duality_gap\n";
  char buf[64];
  const auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  for (const auto& cell : cells) {
    for (double d : cell.deltas) out << fmt(d) << ",";
    const auto& r = cell.result;
    out << (r.feasible ? 1 : 0) << ",";
    out << (r.rate_nats ? fmt(*r.rate_nats) : "") << ",";
    out << (r.rate_bits ? fmt(*r.rate_bits) : "") << ",";
    out << r.iterations << "," << (r.converged ? 1 : 0) << ","
        << fmt(r.duality_gap_estimate) << "\n";
  }
  return out.str();
}

inline std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// One record per invocation: what ran, with which resolved inputs, and what
/// came out. The record goes to stdout; --out files carry only the result
/// payload so identical runs produce identical files.
struct RunRecord {
  std::string command;
  ojson config;
  ojson result;
  double duration_seconds = 0.0;

  ojson to_json() const {
    ojson j;
    j["command"] = command;
    j["version"] = std::string(kVersion);
    j["timestamp_utc"] = iso8601_utc_now();
    j["duration_seconds"] = duration_seconds;
    j["config"] = config;
    j["result"] = result;
    return j;
  }
};

}  // namespace coordcap::io
