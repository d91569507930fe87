#include "cqq/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace cqq::kern {

namespace {

std::atomic<const Ops*> g_selected{nullptr};

const Ops* pick(const char* name) {
  if (name == nullptr || std::strcmp(name, "auto") == 0) {
    const Ops* v = avx2_ops();
    return v != nullptr ? v : &scalar_ops();
  }
  if (std::strcmp(name, "scalar") == 0) return &scalar_ops();
  if (std::strcmp(name, "avx2") == 0) return avx2_ops();
  return nullptr;
}

}  // namespace

const Ops& ops() {
  const Ops* cur = g_selected.load(std::memory_order_acquire);
  if (cur != nullptr) return *cur;
  const Ops* chosen = pick(std::getenv("CQQ_SIMD"));
  if (chosen == nullptr) chosen = &scalar_ops();
  g_selected.store(chosen, std::memory_order_release);
  return *chosen;
}

bool force(const char* name) {
  const Ops* chosen = pick(name);
  if (chosen == nullptr) return false;
  g_selected.store(chosen, std::memory_order_release);
  return true;
}

}  // namespace cqq::kern
