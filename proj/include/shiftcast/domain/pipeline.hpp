#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shiftcast/domain/types.hpp"

namespace shiftcast::domain {

struct DepositPair {
    PasteDeposit pad1;
    PasteDeposit pad2;
};

/// Orders the two deposits of one component by pad index.
/// Throws Error(MissingDeposit) unless exactly two are given and
/// Error(DuplicatePad) when both claim the same pad.
DepositPair pair_deposits(std::span<const PasteDeposit> deposits);

/// Factor transform for one component. Pure and deterministic.
/// Throws Error(NonPositiveDimension) or Error(NonFiniteInput).
FeatureRow featurize(const DepositPair& pair, const PlacementRecord& placement,
                     const ComponentSpec& spec);

enum class OrphanReason { NoDeposits, MissingDeposit, DuplicatePad, DuplicatePlacement };

struct OrphanPlacement {
    std::string board_id;
    std::string component_id;
    OrphanReason reason;
};

struct OrphanDeposit {
    std::string board_id;
    std::string component_id;
    int pad_index;
};

struct JoinDiagnostics {
    std::vector<OrphanPlacement> orphan_placements;
    std::vector<OrphanDeposit> orphan_deposits;

    [[nodiscard]] bool clean() const noexcept {
        return orphan_placements.empty() && orphan_deposits.empty();
    }
};

struct JoinResult {
    std::vector<FeatureRow> rows;
    JoinDiagnostics diagnostics;
};

/// SPI/AOI join on (board_id, component_id). Rows come out sorted by that key.
/// Unmatched records are reported in the diagnostics; a placement naming an
/// unknown component spec throws Error(UnknownSpec).
JoinResult join_spi_aoi(std::span<const PasteDeposit> deposits,
                        std::span<const PlacementRecord> placements,
                        std::span<const ComponentSpec> specs);

/// Avg/std/min/max of the shifts per setting_id, ascending. All rows must
/// carry `spec`'s name (Error(MixedSpec) otherwise). std uses n - 1 and is 0
/// for a single row.
std::vector<ShiftSummary> shift_summary(std::span<const FeatureRow> rows, const ComponentSpec& spec);

std::string_view to_string(OrphanReason reason) noexcept;

}  // namespace shiftcast::domain
