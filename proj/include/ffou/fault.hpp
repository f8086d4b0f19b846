#pragma once

#include <string_view>

namespace ffou {

// Deliberate defects for mutation testing of the validation suite.
enum class Fault {
    none,
    flip_forcing_cov_sign,
    flip_trapezoid_decay,
};

void set_fault(Fault fault);
Fault active_fault();

Fault parse_fault(std::string_view name);
const char* fault_name(Fault fault);

// Restores the previous fault on scope exit.
class ScopedFault {
  public:
    explicit ScopedFault(Fault fault) : previous_(active_fault()) { set_fault(fault); }
    ~ScopedFault() { set_fault(previous_); }
    ScopedFault(const ScopedFault&) = delete;
    ScopedFault& operator=(const ScopedFault&) = delete;

  private:
    Fault previous_;
};

} // namespace ffou
