#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace chase {

enum class Phase { Powerplay, Middle, Death };
enum class WicketsBand { Zero2, Three5, SixPlus };
enum class RateBand { Low, Medium, High };

/// Coarse game situation used to pool historical deliveries.
struct ContextBucket {
    Phase phase = Phase::Middle;
    WicketsBand wickets = WicketsBand::Zero2;
    RateBand rate = RateBand::Medium;

    friend bool operator==(const ContextBucket&, const ContextBucket&) = default;

    /// e.g. "DEATH/0-2/HIGH"
    std::string key() const {
        static constexpr std::array<std::string_view, 3> phases{"POWERPLAY", "MIDDLE", "DEATH"};
        static constexpr std::array<std::string_view, 3> bands{"0-2", "3-5", "6+"};
        static constexpr std::array<std::string_view, 3> rates{"LOW", "MEDIUM", "HIGH"};
        std::string k;
        k += phases[static_cast<int>(phase)];
        k += '/';
        k += bands[static_cast<int>(wickets)];
        k += '/';
        k += rates[static_cast<int>(rate)];
        return k;
    }
};

// Overs 0-5 powerplay, 6-14 middle, 15+ death.
constexpr Phase phaseOf(int over) noexcept {
    if (over <= 5) return Phase::Powerplay;
    if (over <= 14) return Phase::Middle;
    return Phase::Death;
}

constexpr WicketsBand wicketsBandOf(int wickets_down) noexcept {
    if (wickets_down <= 2) return WicketsBand::Zero2;
    if (wickets_down <= 5) return WicketsBand::Three5;
    return WicketsBand::SixPlus;
}

// Runs per over: LOW < 6, MEDIUM 6..9 inclusive, HIGH > 9.
constexpr RateBand rateBandOf(double runs_per_over) noexcept {
    if (runs_per_over < 6.0) return RateBand::Low;
    if (runs_per_over <= 9.0) return RateBand::Medium;
    return RateBand::High;
}

constexpr ContextBucket bucketOf(int over, int wickets_down, double runs_per_over) noexcept {
    return {phaseOf(over), wicketsBandOf(wickets_down), rateBandOf(runs_per_over)};
}

inline std::optional<ContextBucket> parseBucketKey(std::string_view key) {
    for (int p = 0; p < 3; ++p)
        for (int w = 0; w < 3; ++w)
            for (int r = 0; r < 3; ++r) {
                ContextBucket b{static_cast<Phase>(p), static_cast<WicketsBand>(w), static_cast<RateBand>(r)};
                if (b.key() == key) return b;
            }
    return std::nullopt;
}

}  // namespace chase
