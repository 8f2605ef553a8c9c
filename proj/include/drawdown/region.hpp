#pragma once

#include <string_view>

namespace drawdown {

/// Behaviour regions ordered by increasing wealth-to-max-consumption ratio x.
/// In the dual variable z = v'(x) the order is reversed: Ratchet is z < z_a.
enum class Region {
    Floor,          // x == b/r: all wealth in the bank, consume b * cbar
    DrawdownBound,  // [b/r, x_kink]: consume b * cbar
    Interior,       // [x_kink, x_one]: consumption tracks wealth
    RatchetWait,    // [x_one, a]: consume cbar
    Ratchet,        // (a, inf): raise cbar until x = a
};

std::string_view to_string(Region region);

}  // namespace drawdown
