#include "ffou/fault.hpp"

#include <atomic>
#include <string>

#include "ffou/core.hpp"

namespace ffou {

namespace {
std::atomic<Fault> g_fault{Fault::none};
}

void set_fault(Fault fault) { g_fault.store(fault, std::memory_order_relaxed); }

Fault active_fault() { return g_fault.load(std::memory_order_relaxed); }

Fault parse_fault(std::string_view name) {
    if (name == "none") return Fault::none;
    if (name == "flip-forcing-cov-sign") return Fault::flip_forcing_cov_sign;
    if (name == "flip-trapezoid-decay") return Fault::flip_trapezoid_decay;
    throw DomainError("unknown fault '" + std::string(name) + "'");
}

const char* fault_name(Fault fault) {
    switch (fault) {
    case Fault::none: return "none";
    case Fault::flip_forcing_cov_sign: return "flip-forcing-cov-sign";
    case Fault::flip_trapezoid_decay: return "flip-trapezoid-decay";
    }
    return "none";
}

} // namespace ffou
