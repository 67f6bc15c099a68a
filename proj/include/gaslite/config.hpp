/* Copyright 2026 The Gaslite Authors
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

#ifndef GASLITE_CONFIG_HPP
#define GASLITE_CONFIG_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gaslite/bridge.hpp"
#include "gaslite/noc.hpp"
#include "gaslite/result.hpp"
#include "gaslite/segment.hpp"

namespace gaslite {

enum class NodeKind : uint8_t { Software, HardwareCore };

struct DomainConfig {
  uint32_t id = 0;
  Topology topo;
};

struct NodeConfig {
  uint16_t rank = 0;
  uint32_t domain = 0;
  NodeKind kind = NodeKind::Software;
  std::string behavior;  // HardwareCore only
  uint64_t segment_size = 0;
  Placement placement = Placement::OnChip;
};

struct LinkEndpoint {
  uint32_t domain = 0;
  std::string address;  // bridged mode: "unix:<path>"
};

struct LinkRoute {
  uint32_t domain = 0;  // the domain whose table gets this range
  uint16_t lo = 0, hi = 0;
};

struct LinkConfig {
  uint32_t id = 0;
  std::vector<LinkEndpoint> endpoints;  // exactly two
  std::vector<LinkRoute> routes;
};

/// One whole system: domains, their nodes, and the links between domains.
struct SystemConfig {
  uint64_t seed = 0;
  std::string trace_path;
  std::vector<DomainConfig> domains;
  std::vector<NodeConfig> nodes;  // sorted by rank after validation
  std::vector<LinkConfig> links;

  uint16_t size() const { return static_cast<uint16_t>(nodes.size()); }

  const NodeConfig* node(uint16_t rank) const {
    for (const auto& n : nodes)
      if (n.rank == rank) return &n;
    return nullptr;
  }

  const DomainConfig* domain(uint32_t id) const {
    for (const auto& d : domains)
      if (d.id == id) return &d;
    return nullptr;
  }

  std::vector<uint16_t> ranks_in_domain(uint32_t id) const {
    std::vector<uint16_t> out;
    for (const auto& n : nodes)
      if (n.domain == id) out.push_back(n.rank);
    return out;
  }

  uint16_t software_node_count() const {
    uint16_t n = 0;
    for (const auto& nc : nodes)
      if (nc.kind == NodeKind::Software) ++n;
    return n;
  }

  /// Builds the domain's routing table: its own ranks map Local, link route
  /// ranges map to their links. Must be total over all ranks.
  Result<RoutingTable> routing_for(uint32_t domain_id) const {
    RoutingTable table;
    std::vector<uint16_t> local = ranks_in_domain(domain_id);
    std::sort(local.begin(), local.end());
    for (size_t i = 0; i < local.size();) {
      size_t j = i;
      while (j + 1 < local.size() && local[j + 1] == local[j] + 1) ++j;
      if (Status s = table.add(local[i], local[j], RouteTarget::Local()); !s.ok()) return s.error();
      i = j + 1;
    }
    for (const auto& link : links)
      for (const auto& r : link.routes)
        if (r.domain == domain_id)
          if (Status s = table.add(r.lo, r.hi, RouteTarget::Link(link.id)); !s.ok())
            return s.error();
    if (Status s = table.check_total(size()); !s.ok()) return s.error();
    return table;
  }

  Status validate() const {
    if (domains.empty() || nodes.empty()) return Err::ConfigInvalid;

    std::set<uint32_t> domain_ids;
    for (const auto& d : domains) {
      if (!domain_ids.insert(d.id).second) return Err::ConfigInvalid;
      if (!d.topo.validate().ok()) return Err::ConfigInvalid;
    }

    std::set<uint16_t> ranks;
    for (const auto& n : nodes) {
      if (!ranks.insert(n.rank).second) return Err::DuplicateRank;
      if (!domain_ids.count(n.domain)) return Err::ConfigInvalid;
      if (n.segment_size == 0) return Err::ConfigInvalid;
      if (n.kind == NodeKind::HardwareCore && n.behavior.empty()) return Err::ConfigInvalid;
    }
    // ranks dense 0..size-1
    if (*ranks.begin() != 0 || *ranks.rbegin() != nodes.size() - 1) return Err::ConfigInvalid;

    for (const auto& d : domains) {
      const auto in_domain = ranks_in_domain(d.id);
      if (in_domain.empty()) return Err::ConfigInvalid;
      if (d.topo.node_count != in_domain.size()) return Err::ConfigInvalid;
    }

    std::set<uint32_t> link_ids;
    for (const auto& l : links) {
      if (!link_ids.insert(l.id).second) return Err::ConfigInvalid;
      if (l.endpoints.size() != 2) return Err::ConfigInvalid;
      if (l.endpoints[0].domain == l.endpoints[1].domain) return Err::ConfigInvalid;
      for (const auto& e : l.endpoints)
        if (!domain_ids.count(e.domain)) return Err::ConfigInvalid;
      for (const auto& r : l.routes) {
        if (!domain_ids.count(r.domain)) return Err::ConfigInvalid;
        if (r.lo > r.hi) return Err::ConfigInvalid;
        bool at_endpoint = r.domain == l.endpoints[0].domain || r.domain == l.endpoints[1].domain;
        if (!at_endpoint) return Err::ConfigInvalid;
      }
    }

    for (const auto& d : domains) {
      auto table = routing_for(d.id);
      if (!table.ok()) return table.error();
    }
    return {};
  }
};

/// Looks a rank up in the config; the rank must be listed.
inline Result<NodeConfig> find_node_config(const SystemConfig& cfg, uint16_t rank) {
  const NodeConfig* n = cfg.node(rank);
  if (n == nullptr) return Err::UnknownRank;
  return *n;
}

namespace detail {

inline Result<TopologyKind> topology_from(const std::string& s) {
  if (s == "crossbar") return TopologyKind::Crossbar;
  if (s == "ring") return TopologyKind::Ring;
  return Err::ConfigInvalid;
}

inline Result<Placement> placement_from(const std::string& s) {
  if (s == "on_chip") return Placement::OnChip;
  if (s == "off_chip") return Placement::OffChip;
  return Err::ConfigInvalid;
}

}  // namespace detail

/// Parses the documented JSON schema. Structural/JSON problems map to
/// ParseError; semantic problems to the specific config errors.
inline Result<SystemConfig> parse_config(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return Err::ParseError;

  SystemConfig cfg;
  try {
    cfg.seed = j.value("seed", 0ull);
    cfg.trace_path = j.value("trace", std::string());

    if (!j.contains("domains") || !j["domains"].is_array()) return Err::ParseError;
    for (const auto& jd : j["domains"]) {
      DomainConfig d;
      d.id = jd.at("id").get<uint32_t>();
      auto topo = detail::topology_from(jd.at("topology").get<std::string>());
      if (!topo.ok()) return topo.error();
      d.topo.kind = topo.value();
      d.topo.router_latency = jd.value("router_latency", 4u);
      d.topo.link_bytes_per_cycle = jd.value("link_bytes_per_cycle", 4u);
      d.topo.node_count = jd.value("nodes", 0u);  // 0: derived below
      cfg.domains.push_back(d);
    }

    if (!j.contains("nodes") || !j["nodes"].is_array()) return Err::ParseError;
    for (const auto& jn : j["nodes"]) {
      NodeConfig n;
      n.rank = jn.at("rank").get<uint16_t>();
      n.domain = jn.value("domain", 0u);
      const std::string kind = jn.value("kind", std::string("software"));
      if (kind == "software") {
        n.kind = NodeKind::Software;
      } else if (kind == "hardware") {
        n.kind = NodeKind::HardwareCore;
        n.behavior = jn.value("behavior", std::string());
      } else {
        return Err::ConfigInvalid;
      }
      n.segment_size = jn.value("segment_size", 65536ull);
      auto placement = detail::placement_from(jn.value("placement", std::string("on_chip")));
      if (!placement.ok()) return placement.error();
      n.placement = placement.value();
      cfg.nodes.push_back(n);
    }

    for (const auto& jl : j.value("links", nlohmann::json::array())) {
      LinkConfig l;
      l.id = jl.at("id").get<uint32_t>();
      for (const auto& je : jl.at("endpoints")) {
        LinkEndpoint e;
        e.domain = je.at("domain").get<uint32_t>();
        e.address = je.value("address", std::string());
        l.endpoints.push_back(e);
      }
      for (const auto& jr : jl.value("routes", nlohmann::json::array())) {
        LinkRoute r;
        r.domain = jr.at("domain").get<uint32_t>();
        const auto& ranks = jr.at("ranks");
        if (!ranks.is_array() || ranks.size() != 2) return Err::ParseError;
        r.lo = ranks[0].get<uint16_t>();
        r.hi = ranks[1].get<uint16_t>();
        l.routes.push_back(r);
      }
      cfg.links.push_back(l);
    }
  } catch (const nlohmann::json::exception&) {
    return Err::ParseError;
  }

  // fill derived domain node counts before validating
  for (auto& d : cfg.domains)
    if (d.topo.node_count == 0)
      d.topo.node_count = static_cast<uint16_t>(cfg.ranks_in_domain(d.id).size());

  std::sort(cfg.nodes.begin(), cfg.nodes.end(),
            [](const NodeConfig& a, const NodeConfig& b) { return a.rank < b.rank; });

  if (Status s = cfg.validate(); !s.ok()) return s.error();
  return cfg;
}

inline Result<SystemConfig> load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) return Err::ParseError;
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace gaslite

#endif  // GASLITE_CONFIG_HPP
