#include "drawdown/region.hpp"

namespace drawdown {

std::string_view to_string(Region region) {
    switch (region) {
        case Region::Floor: return "floor";
        case Region::DrawdownBound: return "drawdown-bound";
        case Region::Interior: return "interior";
        case Region::RatchetWait: return "ratchet-wait";
        case Region::Ratchet: return "ratchet";
    }
    return "unknown";
}

}  // namespace drawdown
