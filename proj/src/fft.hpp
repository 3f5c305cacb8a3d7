#pragma once

#include <cstddef>
#include <mutex>
#include <new>

#include <fftw3.h>

namespace kst::detail {

/// FFTW's planner is not re-entrant; plan creation and destruction go through this lock.
std::mutex& fftw_planner_mutex();

/// fftw_malloc'd array. Plans made on one buffer may be executed on any other
/// buffer from this allocator (same alignment).
template <typename T>
class FftwBuffer {
 public:
  explicit FftwBuffer(std::size_t n) : n_(n), p_(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
    if (!p_) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(p_); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  T* data() { return p_; }
  const T* data() const { return p_; }
  std::size_t size() const { return n_; }
  T& operator[](std::size_t i) { return p_[i]; }

 private:
  std::size_t n_;
  T* p_;
};

class FftwPlan {
 public:
  FftwPlan() = default;
  explicit FftwPlan(fftw_plan p) : p_(p) {}
  ~FftwPlan() { reset(); }
  FftwPlan(FftwPlan&& o) noexcept : p_(o.p_) { o.p_ = nullptr; }
  FftwPlan& operator=(FftwPlan&& o) noexcept {
    if (this != &o) {
      reset();
      p_ = o.p_;
      o.p_ = nullptr;
    }
    return *this;
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;

  fftw_plan get() const { return p_; }

 private:
  void reset() {
    if (p_) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(p_);
      p_ = nullptr;
    }
  }
  fftw_plan p_ = nullptr;
};

}  // namespace kst::detail
