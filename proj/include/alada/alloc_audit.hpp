#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <new>
#include <vector>

namespace alada {

/// Counts scalar allocations made on the current thread while the scope is alive.
///
/// Every Matrix, Vector and Tensor buffer is allocated through TrackedAllocator, so
/// wrapping an optimizer step in an AllocationAudit reports every transient buffer the
/// step creates. Scopes nest; an inner scope also forwards to its parent.
class AllocationAudit {
 public:
  /// Allocations of at least `large_threshold` scalars are counted separately.
  explicit AllocationAudit(std::size_t large_threshold = std::numeric_limits<std::size_t>::max());
  ~AllocationAudit();
  AllocationAudit(const AllocationAudit&) = delete;
  AllocationAudit& operator=(const AllocationAudit&) = delete;

  std::size_t allocations() const noexcept { return allocations_; }
  std::size_t large_allocations() const noexcept { return large_allocations_; }
  std::size_t total_scalars() const noexcept { return total_scalars_; }
  /// Largest single allocation, in scalars.
  std::size_t peak_scalars() const noexcept { return peak_scalars_; }
  std::size_t large_threshold() const noexcept { return large_threshold_; }

  static void record(std::size_t scalars) noexcept;

 private:
  void note(std::size_t scalars) noexcept;

  AllocationAudit* parent_;
  std::size_t large_threshold_;
  std::size_t allocations_ = 0;
  std::size_t large_allocations_ = 0;
  std::size_t total_scalars_ = 0;
  std::size_t peak_scalars_ = 0;
};

template <class T>
struct TrackedAllocator {
  using value_type = T;

  TrackedAllocator() noexcept = default;
  template <class U>
  TrackedAllocator(const TrackedAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) {
    AllocationAudit::record(count);
    return std::allocator<T>{}.allocate(count);
  }
  void deallocate(T* ptr, std::size_t count) noexcept { std::allocator<T>{}.deallocate(ptr, count); }

  template <class U>
  bool operator==(const TrackedAllocator<U>&) const noexcept {
    return true;
  }
};

/// Dense real vector; storage for Matrix and Tensor as well.
using Vector = std::vector<double, TrackedAllocator<double>>;

}  // namespace alada
