#pragma once

// The chase engine re-parameterized for production scheduling (units needed,
// periods left, machines working) and perishable inventory control.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "chase/dp_solver.hpp"
#include "chase/match_model.hpp"
#include "chase/mdp.hpp"

namespace chase {

// ---------------------------------------------------------------------------
// Manufacturing
// ---------------------------------------------------------------------------

/// Outcome support mirrors the chase: units produced in {0,1,2,3,4,6}, or
/// BREAKDOWN (the WICKET slot), which takes one machine out of service.
struct ManufacturingParams {
    int units_needed = 0;
    int periods_remaining = 0;
    int machines_working = 0;
    /// Ordered from least to most intense; order is the tie-break order.
    std::vector<std::pair<std::string, OutcomeDistribution>> intensity_rows;

    void validate() const {
        if (units_needed < 0 || periods_remaining < 0 || machines_working < 0)
            throw ModelError("manufacturing parameters must be non-negative");
        if (intensity_rows.empty()) throw ModelError("at least one intensity level is required");
        for (const auto& [name, row] : intensity_rows)
            if (auto problem = row.check(); !problem.empty()) throw ModelError("intensity " + name + ": " + problem);
    }

    /// Same state grid and layout as the chase value table.
    Bounds grid() const { return {units_needed, periods_remaining, machines_working}; }
};

/// Intensity levels named after the actions, rows copied from the model.
inline ManufacturingParams manufacturingFromChase(const TransitionModel& model, const MatchState& start) {
    ManufacturingParams p{start.runs_needed, start.balls_remaining, start.wickets_in_hand, {}};
    for (BattingAction a : kActions) p.intensity_rows.emplace_back(std::string(actionName(a)), model.row(a));
    return p;
}

/// States (u, t, m) over the full grid, indexed like Bounds::index. Done
/// (u = 0) absorbs with value 1; out of time or machines absorbs with 0.
inline MdpInstance buildManufacturingMdp(const ManufacturingParams& params) {
    params.validate();
    const Bounds grid = params.grid();
    MdpInstance mdp;
    const auto n = grid.stateCount();
    mdp.state_labels.resize(n);
    mdp.actions.resize(n);
    mdp.terminal_value.assign(n, 0.0);
    mdp.discount = 1.0;
    mdp.horizon = params.periods_remaining;
    forEachState(grid, [&](const MatchState& s) {
        const auto i = grid.index(s);
        mdp.state_labels[i] = "u=" + std::to_string(s.runs_needed) + ",t=" + std::to_string(s.balls_remaining) +
                              ",m=" + std::to_string(s.wickets_in_hand);
        if (const auto status = terminalStatus(s); status != Status::NonTerminal) {
            mdp.terminal_value[i] = status == Status::Win ? 1.0 : 0.0;
            return;
        }
        for (const auto& [name, row] : params.intensity_rows) {
            MdpAction act{name, {}};
            for (BallOutcome o : kOutcomes) {
                if (row[o] == 0.0) continue;
                MatchState next = o == BallOutcome::Wicket
                                      ? MatchState{s.runs_needed, s.balls_remaining - 1, s.wickets_in_hand - 1}
                                      : MatchState{std::max(s.runs_needed - runsOf(o), 0), s.balls_remaining - 1,
                                                   s.wickets_in_hand};
                act.successors.push_back({grid.index(next), row[o], 0.0});
            }
            mdp.actions[i].push_back(std::move(act));
        }
    });
    return mdp;
}

// ---------------------------------------------------------------------------
// Inventory
// ---------------------------------------------------------------------------

/// Periodic review, lost sales. Each period: order q arrives, demand d is
/// served from min(stock + q, max_stock), a `spoilage` fraction of what is
/// left (rounded to the nearest unit) perishes. Cost per period:
/// order_cost * q + holding_cost * leftover + stockout_cost * unmet.
struct InventoryParams {
    int min_stock = 0;
    int max_stock = 0;
    int max_order = 0;
    std::vector<std::pair<int, double>> demand;  ///< (demand, probability)
    double holding_cost = 0.0;
    double stockout_cost = 0.0;
    double order_cost = 0.0;
    double spoilage = 0.0;
    double discount = 0.95;

    void validate() const {
        if (min_stock < 0 || max_stock < min_stock) throw ModelError("invalid stock range");
        if (max_order < 0) throw ModelError("max_order must be non-negative");
        if (demand.empty()) throw ModelError("demand distribution is empty");
        double sum = 0.0;
        for (const auto& [d, p] : demand) {
            if (d < 0 || !(p >= 0.0)) throw ModelError("demand entries must be non-negative");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kProbabilityTolerance) throw ModelError("demand probabilities do not sum to 1");
        if (holding_cost < 0.0 || stockout_cost < 0.0 || order_cost < 0.0) throw ModelError("costs must be non-negative");
        if (!(spoilage >= 0.0 && spoilage <= 1.0)) throw ModelError("spoilage must lie in [0, 1]");
        if (!(discount >= 0.0 && discount < 1.0)) throw ModelError("inventory discount must lie in [0, 1)");
    }
};

/// State i holds stock min_stock + i; action j orders j units. Rewards are
/// negated costs; infinite horizon, discounted.
inline MdpInstance buildInventoryMdp(const InventoryParams& params) {
    params.validate();
    MdpInstance mdp;
    const int levels = params.max_stock - params.min_stock + 1;
    mdp.state_labels.resize(static_cast<std::size_t>(levels));
    mdp.actions.resize(static_cast<std::size_t>(levels));
    mdp.terminal_value.assign(static_cast<std::size_t>(levels), 0.0);
    mdp.discount = params.discount;
    for (int i = 0; i < levels; ++i) {
        const int stock = params.min_stock + i;
        mdp.state_labels[static_cast<std::size_t>(i)] = "stock=" + std::to_string(stock);
        for (int q = 0; q <= params.max_order; ++q) {
            MdpAction act{"order=" + std::to_string(q), {}};
            const int available = std::min(stock + q, params.max_stock);
            for (const auto& [d, p] : params.demand) {
                if (p == 0.0) continue;
                const int sold = std::min(available, d);
                const int unmet = d - sold;
                const int leftover = available - sold;
                const int spoiled = static_cast<int>(std::lround(params.spoilage * leftover));
                const int next = std::max(leftover - spoiled, params.min_stock);
                const double cost = params.order_cost * q + params.holding_cost * leftover + params.stockout_cost * unmet;
                act.successors.push_back({static_cast<std::size_t>(next - params.min_stock), p, -cost});
            }
            mdp.actions[static_cast<std::size_t>(i)].push_back(std::move(act));
        }
    }
    return mdp;
}

// ---------------------------------------------------------------------------
// Parameter packs
// ---------------------------------------------------------------------------

inline ManufacturingParams manufacturingFromJson(const json& doc) {
    requireDocument(doc, "manufacturing_params");
    ManufacturingParams p;
    p.units_needed = doc.at("units_needed").get<int>();
    p.periods_remaining = doc.at("periods_remaining").get<int>();
    p.machines_working = doc.at("machines_working").get<int>();
    for (const auto& level : doc.at("intensity_rows")) {
        // Rows use the chase outcome names, "W" standing for BREAKDOWN.
        json row = level.at("row");
        if (row.contains("BREAKDOWN")) row["W"] = row["BREAKDOWN"];
        p.intensity_rows.emplace_back(level.at("name").get<std::string>(), rowFromJson(row));
    }
    p.validate();
    return p;
}

inline json manufacturingToJson(const ManufacturingParams& p) {
    json doc = makeDocument("manufacturing_params");
    doc["units_needed"] = p.units_needed;
    doc["periods_remaining"] = p.periods_remaining;
    doc["machines_working"] = p.machines_working;
    json rows = json::array();
    for (const auto& [name, row] : p.intensity_rows) rows.push_back({{"name", name}, {"row", rowToJson(row)}});
    doc["intensity_rows"] = rows;
    return doc;
}

inline InventoryParams inventoryFromJson(const json& doc) {
    requireDocument(doc, "inventory_params");
    InventoryParams p;
    p.min_stock = doc.value("min_stock", 0);
    p.max_stock = doc.at("max_stock").get<int>();
    p.max_order = doc.at("max_order").get<int>();
    for (const auto& d : doc.at("demand")) p.demand.emplace_back(d.at("demand").get<int>(), d.at("probability").get<double>());
    p.holding_cost = doc.value("holding_cost", 0.0);
    p.stockout_cost = doc.value("stockout_cost", 0.0);
    p.order_cost = doc.value("order_cost", 0.0);
    p.spoilage = doc.value("spoilage", 0.0);
    p.discount = doc.value("discount", 0.95);
    p.validate();
    return p;
}

inline json inventoryToJson(const InventoryParams& p) {
    json doc = makeDocument("inventory_params");
    doc["min_stock"] = p.min_stock;
    doc["max_stock"] = p.max_stock;
    doc["max_order"] = p.max_order;
    json demand = json::array();
    for (const auto& [d, pr] : p.demand) demand.push_back({{"demand", d}, {"probability", pr}});
    doc["demand"] = demand;
    doc["holding_cost"] = p.holding_cost;
    doc["stockout_cost"] = p.stockout_cost;
    doc["order_cost"] = p.order_cost;
    doc["spoilage"] = p.spoilage;
    doc["discount"] = p.discount;
    return doc;
}

}  // namespace chase
