#include "pcs/actuator_manager.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

namespace pcs {

namespace {

constexpr double kAmountTolerance = 1e-9;

std::size_t group_index(std::span<const ActuatorGroup> groups, std::string_view id) {
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].id == id) return i;
  }
  throw ConfigError(fmt::format("unknown actuator group '{}'", id));
}

int priority_of(const TaskPriorities& priorities, std::string_view task) {
  auto it = priorities.find(task);
  if (it == priorities.end()) throw ConfigError(fmt::format("task '{}' has no priority", task));
  return it->second;
}

}  // namespace

Allocation allocate(std::span<const ResourceRequest> requests,
                    std::span<const ActuatorGroup> groups, const TaskPriorities& priorities) {
  std::set<std::pair<std::string_view, std::string_view>> seen;
  std::vector<std::size_t> order(requests.size());
  std::vector<int> prio(requests.size());
  std::vector<std::size_t> gidx(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& r = requests[i];
    if (!seen.emplace(r.task, r.group).second) {
      throw ConfigError(fmt::format("duplicate request from task '{}' on group '{}'", r.task,
                                    r.group));
    }
    gidx[i] = group_index(groups, r.group);
    prio[i] = priority_of(priorities, r.task);
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return prio[a] < prio[b]; });

  std::vector<double> remaining(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) remaining[g] = std::max(0.0, groups[g].availability);

  std::vector<double> granted(requests.size(), 0.0);
  for (std::size_t i : order) {
    const auto& r = requests[i];
    const double offer = std::min(std::max(0.0, r.requested), remaining[gidx[i]]);
    // Absorbs rounding left over from earlier subtractions.
    const double tol = kAmountTolerance * std::max(1.0, groups[gidx[i]].availability);
    if (offer > tol && offer >= r.minimum - tol) {
      granted[i] = offer;
      remaining[gidx[i]] -= offer;
    }
  }

  Allocation out;
  out.grants.reserve(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    out.grants.push_back(Grant{requests[i].task, requests[i].group, granted[i]});
  }
  // The running subtraction can leave the re-summed total an ulp over;
  // take it back from the lowest-priority grant in that group.
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double avail = std::max(0.0, groups[g].availability);
    while (out.total(groups[g].id) > avail) {
      auto last = std::find_if(order.rbegin(), order.rend(),
                               [&](std::size_t i) { return gidx[i] == g && out.grants[i].granted > 0.0; });
      auto& grant = out.grants[*last].granted;
      grant = std::nextafter(grant, 0.0);
      granted[*last] = grant;
    }
  }
  for (std::size_t i : order) {
    if (granted[i] == 0.0 && requests[i].requested > 0.0 &&
        std::find(out.starved.begin(), out.starved.end(), requests[i].task) == out.starved.end()) {
      out.starved.push_back(requests[i].task);
    }
  }
  return out;
}

MergeResult merge_commands(std::span<const TaskCommand> outputs, const Allocation& allocation,
                           std::span<const ActuatorGroup> groups,
                           const TaskPriorities& priorities, double time) {
  MergeResult out;
  std::vector<double> sum(groups.size(), 0.0);
  std::vector<bool> touched(groups.size(), false);
  std::vector<int> owner_priority(groups.size(), 0);

  for (const auto& tc : outputs) {
    const std::size_t g = group_index(groups, tc.command.group);
    if (allocation.granted(tc.task, tc.command.group) <= 0.0) {
      out.violations.push_back(fmt::format("task '{}' commanded group '{}' without a grant",
                                           tc.task, tc.command.group));
      continue;
    }
    if (groups[g].semantics == GroupSemantics::Additive) {
      sum[g] += tc.command.value;
      touched[g] = true;
    } else {
      const int p = priority_of(priorities, tc.task);
      if (!touched[g] || p < owner_priority[g]) {
        sum[g] = tc.command.value;
        owner_priority[g] = p;
        touched[g] = true;
      }
    }
  }

  out.commands.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double value =
        touched[g] ? std::clamp(sum[g], groups[g].range_lo, groups[g].range_hi) : groups[g].idle;
    out.commands.push_back(ActuatorCommand{groups[g].id, value, time});
  }
  return out;
}

}  // namespace pcs
