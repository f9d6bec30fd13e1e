#pragma once

// Per-unit electrical data of a distribution feeder: buses, lines and the
// big-M constant of the switched voltage-drop constraints.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dnr/error.hpp"

namespace dnr {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Bus {
  int id = 0;
  double p_load = 0.0;
  double q_load = 0.0;
  double v_min = 0.95;  // voltage magnitude, p.u.
  double v_max = 1.05;
  bool is_root = false;

  friend bool operator==(const Bus&, const Bus&) = default;
};

/// A line with presupposed direction from_bus -> to_bus. Flows may be negative.
struct Line {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;
  double x = 0.0;
  double p_max = 0.0;
  double q_max = 0.0;

  friend bool operator==(const Line&, const Line&) = default;
};

/// Per-bus real and reactive demand, the load hyperparameter of the auxiliary model.
struct LoadVector {
  Vec p;
  Vec q;
};

namespace detail {

struct DisjointSets {
  std::vector<Index> parent;
  explicit DisjointSets(Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), Index{0});
  }
  Index find(Index a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace detail

/// Immutable feeder model. Construct through Network::create or load_network;
/// both reject data violating the invariants listed by validate().
class Network {
 public:
  Network() = default;

  /// Builds a network, computing big_m when absent. Throws ValidationError or
  /// DisconnectedGraph.
  static Network create(std::vector<Bus> buses, std::vector<Line> lines,
                        std::optional<double> big_m = std::nullopt,
                        double base_mva = 1.0);

  /// Builds without validation. Used to exercise validate() on broken data.
  static Network create_unchecked(std::vector<Bus> buses, std::vector<Line> lines,
                                  std::optional<double> big_m = std::nullopt,
                                  double base_mva = 1.0) {
    Network net;
    net.buses_ = std::move(buses);
    net.lines_ = std::move(lines);
    net.base_mva_ = base_mva;
    net.big_m_given_ = big_m.has_value();
    net.derive();
    net.big_m_ = big_m ? *big_m : net.big_m_bound();
    return net;
  }

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  Index num_buses() const { return static_cast<Index>(buses_.size()); }
  Index num_lines() const { return static_cast<Index>(lines_.size()); }
  double big_m() const { return big_m_; }
  double base_mva() const { return base_mva_; }
  Index root() const { return root_; }

  Index bus_index(int id) const {
    auto it = bus_index_.find(id);
    if (it == bus_index_.end()) throw ValidationError("unknown bus id " + std::to_string(id));
    return it->second;
  }
  Index line_index(int id) const {
    auto it = line_index_.find(id);
    if (it == line_index_.end()) throw ValidationError("unknown line id " + std::to_string(id));
    return it->second;
  }
  bool has_line(int id) const { return line_index_.count(id) != 0; }

  /// Sending-end (from) and receiving-end (to) bus indices of line e.
  Index from(Index e) const { return from_[e]; }
  Index to(Index e) const { return to_[e]; }

  /// Lines whose presupposed direction flows into / out of bus n.
  const std::vector<Index>& inflow(Index n) const { return inflow_[n]; }
  const std::vector<Index>& outflow(Index n) const { return outflow_[n]; }

  LoadVector nominal_loads() const {
    LoadVector d{Vec(num_buses()), Vec(num_buses())};
    for (Index n = 0; n < num_buses(); ++n) {
      d.p[n] = buses_[n].p_load;
      d.q[n] = buses_[n].q_load;
    }
    return d;
  }

  double min_v_min() const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& b : buses_) v = std::min(v, b.v_min);
    return v;
  }
  double max_v_max() const {
    double v = 0.0;
    for (const auto& b : buses_) v = std::max(v, b.v_max);
    return v;
  }

  /// Upper bound on the squared current of a line implied by the flow limits
  /// and the lowest voltage magnitude of the feeder.
  double line_current_cap(const Line& line) const {
    const double vmin = min_v_min();
    return (line.p_max * line.p_max + line.q_max * line.q_max) / (vmin * vmin);
  }

  /// Smallest M that keeps the switched voltage-drop rows valid over the box:
  /// spread of squared voltages plus the largest possible drop expression.
  double big_m_bound() const {
    if (buses_.empty()) return 0.0;
    const double vmax = max_v_max();
    const double vmin = min_v_min();
    double drop = 0.0;
    for (const auto& line : lines_) {
      const double z2 = line.r * line.r + line.x * line.x;
      drop = std::max(drop, 2.0 * (line.r * line.p_max + line.x * line.q_max) +
                                z2 * line_current_cap(line));
    }
    return vmax * vmax - vmin * vmin + drop;
  }

  bool big_m_given() const { return big_m_given_; }

  /// Undirected connectivity of the full line graph.
  bool connected() const {
    if (buses_.empty()) return false;
    detail::DisjointSets sets(num_buses());
    Index components = num_buses();
    for (Index e = 0; e < num_lines(); ++e) {
      if (from_[e] < 0 || to_[e] < 0) continue;
      if (sets.unite(from_[e], to_[e])) --components;
    }
    return components == 1;
  }

  friend bool operator==(const Network& a, const Network& b) {
    return a.buses_ == b.buses_ && a.lines_ == b.lines_ && a.big_m_ == b.big_m_ &&
           a.base_mva_ == b.base_mva_;
  }

 private:
  void derive() {
    bus_index_.clear();
    line_index_.clear();
    root_ = -1;
    for (Index n = 0; n < num_buses(); ++n) {
      bus_index_.emplace(buses_[n].id, n);
      if (buses_[n].is_root && root_ < 0) root_ = n;
    }
    for (Index e = 0; e < num_lines(); ++e) line_index_.emplace(lines_[e].id, e);
    from_.assign(lines_.size(), -1);
    to_.assign(lines_.size(), -1);
    inflow_.assign(buses_.size(), {});
    outflow_.assign(buses_.size(), {});
    for (Index e = 0; e < num_lines(); ++e) {
      auto f = bus_index_.find(lines_[e].from_bus);
      auto t = bus_index_.find(lines_[e].to_bus);
      if (f == bus_index_.end() || t == bus_index_.end()) continue;
      from_[e] = f->second;
      to_[e] = t->second;
      outflow_[f->second].push_back(e);
      inflow_[t->second].push_back(e);
    }
  }

  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  double big_m_ = 0.0;
  double base_mva_ = 1.0;
  bool big_m_given_ = false;
  Index root_ = -1;
  std::map<int, Index> bus_index_;
  std::map<int, Index> line_index_;
  std::vector<Index> from_;
  std::vector<Index> to_;
  std::vector<std::vector<Index>> inflow_;
  std::vector<std::vector<Index>> outflow_;
};

inline constexpr const char* kDisconnectedMessage = "disconnected line graph";

/// All invariant violations of a network, each naming the entity and rule.
/// Empty iff the network is valid.
inline std::vector<std::string> validate(const Network& net) {
  std::vector<std::string> out;
  auto entity = [](const char* kind, std::size_t pos, int id) {
    std::ostringstream s;
    s << kind << "[" << pos << "] (id " << id << ")";
    return s.str();
  };

  if (net.buses().empty()) out.emplace_back("network has no buses");

  std::set<int> bus_ids;
  int roots = 0;
  for (std::size_t i = 0; i < net.buses().size(); ++i) {
    const Bus& b = net.buses()[i];
    const auto who = entity("buses", i, b.id);
    if (b.id <= 0) out.push_back(who + ": id must be a positive integer");
    if (!bus_ids.insert(b.id).second) out.push_back(who + ": duplicate bus id");
    if (!(b.v_min > 0.0)) out.push_back(who + ": v_min must be positive");
    if (!(b.v_min < b.v_max)) out.push_back(who + ": v_min must be below v_max");
    if (!(b.p_load >= 0.0)) out.push_back(who + ": p_load must be nonnegative");
    if (!std::isfinite(b.q_load)) out.push_back(who + ": q_load must be finite");
    if (b.is_root) ++roots;
  }
  if (roots == 0) out.emplace_back("no root bus");
  if (roots > 1) out.emplace_back("multiple roots");

  std::set<int> line_ids;
  std::set<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < net.lines().size(); ++i) {
    const Line& l = net.lines()[i];
    const auto who = entity("lines", i, l.id);
    if (l.id <= 0) out.push_back(who + ": id must be a positive integer");
    if (!line_ids.insert(l.id).second) out.push_back(who + ": duplicate line id");
    if (!(l.r > 0.0)) out.push_back(who + ": r must be positive");
    if (!(l.x > 0.0)) out.push_back(who + ": x must be positive");
    if (!(l.p_max > 0.0)) out.push_back(who + ": p_max must be positive");
    if (!(l.q_max > 0.0)) out.push_back(who + ": q_max must be positive");
    if (l.from_bus == l.to_bus) out.push_back(who + ": from and to must differ");
    if (!bus_ids.count(l.from_bus)) out.push_back(who + ": unknown from bus");
    if (!bus_ids.count(l.to_bus)) out.push_back(who + ": unknown to bus");
    const auto key = std::minmax(l.from_bus, l.to_bus);
    if (!pairs.insert({key.first, key.second}).second)
      out.push_back(who + ": parallel line between the same buses");
  }

  if (net.num_buses() > 0 && net.num_lines() < net.num_buses() - 1)
    out.emplace_back("too few lines for a spanning tree");
  if (net.num_buses() > 0 && !net.connected()) out.emplace_back(kDisconnectedMessage);

  if (!(net.big_m() > 0.0)) {
    out.emplace_back("big_m must be positive");
  } else if (net.big_m_given() && net.big_m() < net.big_m_bound() * (1.0 - 1e-12)) {
    std::ostringstream s;
    s.precision(17);
    s << "big_m below the voltage-drop bound " << net.big_m_bound();
    out.push_back(s.str());
  }
  return out;
}

inline Network Network::create(std::vector<Bus> buses, std::vector<Line> lines,
                               std::optional<double> big_m, double base_mva) {
  Network net = create_unchecked(std::move(buses), std::move(lines), big_m, base_mva);
  auto violations = validate(net);
  if (violations.empty()) return net;
  const bool only_disconnected =
      violations.size() == 1 && violations.front() == kDisconnectedMessage;
  std::string msg;
  for (const auto& v : violations) msg += (msg.empty() ? "" : "; ") + v;
  if (only_disconnected) throw DisconnectedGraph(msg);
  throw ValidationError(msg);
}

// ---------------------------------------------------------------------------
// JSON file format

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> keys,
                           const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ParseError(path + "." + it.key() + ": unknown key");
  }
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key,
                                     const std::string& path) {
  if (!obj.contains(key)) throw ParseError(path + "." + key + ": missing");
  return obj.at(key);
}

inline double number(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_number()) throw ParseError(path + "." + key + ": expected a number");
  return v.get<double>();
}

inline int positive_id(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_number_integer() || v.get<long long>() <= 0 ||
      v.get<long long>() > std::numeric_limits<int>::max())
    throw ParseError(path + "." + key + ": expected a positive integer");
  return v.get<int>();
}

}  // namespace detail

/// Parses and validates a network document.
inline Network parse_network(const nlohmann::json& doc) {
  using detail::number;
  using detail::positive_id;
  if (!doc.is_object()) throw ParseError("$: expected an object");
  detail::reject_unknown(doc, {"base_mva", "buses", "lines", "big_m"}, "$");
  const double base = number(doc, "base_mva", "$");
  if (!(base > 0.0)) throw ParseError("$.base_mva: must be positive");

  const auto& jb = detail::require(doc, "buses", "$");
  if (!jb.is_array()) throw ParseError("$.buses: expected an array");
  std::vector<Bus> buses;
  for (std::size_t i = 0; i < jb.size(); ++i) {
    const std::string path = "$.buses[" + std::to_string(i) + "]";
    const auto& o = jb[i];
    if (!o.is_object()) throw ParseError(path + ": expected an object");
    detail::reject_unknown(o, {"id", "p_load", "q_load", "v_min", "v_max", "is_root"}, path);
    Bus b;
    b.id = positive_id(o, "id", path);
    b.p_load = number(o, "p_load", path);
    b.q_load = number(o, "q_load", path);
    b.v_min = number(o, "v_min", path);
    b.v_max = number(o, "v_max", path);
    const auto& root = detail::require(o, "is_root", path);
    if (!root.is_boolean()) throw ParseError(path + ".is_root: expected a boolean");
    b.is_root = root.get<bool>();
    buses.push_back(b);
  }

  const auto& jl = detail::require(doc, "lines", "$");
  if (!jl.is_array()) throw ParseError("$.lines: expected an array");
  std::vector<Line> lines;
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const std::string path = "$.lines[" + std::to_string(i) + "]";
    const auto& o = jl[i];
    if (!o.is_object()) throw ParseError(path + ": expected an object");
    detail::reject_unknown(o, {"id", "from", "to", "r", "x", "p_max", "q_max"}, path);
    Line l;
    l.id = positive_id(o, "id", path);
    l.from_bus = positive_id(o, "from", path);
    l.to_bus = positive_id(o, "to", path);
    l.r = number(o, "r", path);
    l.x = number(o, "x", path);
    l.p_max = number(o, "p_max", path);
    l.q_max = number(o, "q_max", path);
    lines.push_back(l);
  }

  std::optional<double> big_m;
  if (doc.contains("big_m")) big_m = number(doc, "big_m", "$");
  return Network::create(std::move(buses), std::move(lines), big_m, base);
}

inline nlohmann::json to_json(const Network& net) {
  nlohmann::json doc;
  doc["base_mva"] = net.base_mva();
  doc["buses"] = nlohmann::json::array();
  for (const auto& b : net.buses()) {
    doc["buses"].push_back({{"id", b.id},
                            {"p_load", b.p_load},
                            {"q_load", b.q_load},
                            {"v_min", b.v_min},
                            {"v_max", b.v_max},
                            {"is_root", b.is_root}});
  }
  doc["lines"] = nlohmann::json::array();
  for (const auto& l : net.lines()) {
    doc["lines"].push_back({{"id", l.id},
                            {"from", l.from_bus},
                            {"to", l.to_bus},
                            {"r", l.r},
                            {"x", l.x},
                            {"p_max", l.p_max},
                            {"q_max", l.q_max}});
  }
  doc["big_m"] = net.big_m();
  return doc;
}

inline double line_current_cap(const Line& line, const Network& net) {
  return net.line_current_cap(line);
}

inline std::string serialize(const Network& net) { return to_json(net).dump(2); }

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline Network load_network(const std::string& path) { return parse_network(read_json_file(path)); }

}  // namespace dnr
