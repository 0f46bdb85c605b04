#include "btbsim/ras.hpp"

#include <stdexcept>

namespace btbsim {

ReturnAddressStack::ReturnAddressStack(std::size_t depth) : slots_(depth) {
  if (depth == 0) throw std::invalid_argument("RAS depth must be positive");
}

void ReturnAddressStack::push(Addr return_addr) {
  slots_[head_] = return_addr;
  head_ = (head_ + 1) % slots_.size();
  if (size_ < slots_.size()) ++size_;
}

std::optional<Addr> ReturnAddressStack::pop() {
  if (size_ == 0) return std::nullopt;
  head_ = (head_ + slots_.size() - 1) % slots_.size();
  --size_;
  return slots_[head_];
}

std::optional<Addr> ReturnAddressStack::top() const {
  if (size_ == 0) return std::nullopt;
  return slots_[(head_ + slots_.size() - 1) % slots_.size()];
}

}  // namespace btbsim
