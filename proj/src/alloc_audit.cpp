#include "alada/alloc_audit.hpp"

#include <algorithm>

namespace alada {
namespace {
thread_local AllocationAudit* current_audit = nullptr;
}

AllocationAudit::AllocationAudit(std::size_t large_threshold)
    : parent_(current_audit), large_threshold_(large_threshold) {
  current_audit = this;
}

AllocationAudit::~AllocationAudit() { current_audit = parent_; }

void AllocationAudit::record(std::size_t scalars) noexcept {
  for (AllocationAudit* audit = current_audit; audit != nullptr; audit = audit->parent_) {
    audit->note(scalars);
  }
}

void AllocationAudit::note(std::size_t scalars) noexcept {
  ++allocations_;
  total_scalars_ += scalars;
  peak_scalars_ = std::max(peak_scalars_, scalars);
  if (scalars >= large_threshold_) ++large_allocations_;
}

}  // namespace alada
