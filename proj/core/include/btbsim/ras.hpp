#ifndef BTBSIM_RAS_HPP
#define BTBSIM_RAS_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "btbsim/trace.hpp"

namespace btbsim {

/// Bounded return address stack. Pushing onto a full stack overwrites the
/// oldest entry; popping an empty stack yields nullopt.
class ReturnAddressStack {
 public:
  explicit ReturnAddressStack(std::size_t depth = 32);

  void push(Addr return_addr);
  std::optional<Addr> pop();
  std::optional<Addr> top() const;

  std::size_t size() const { return size_; }
  std::size_t depth() const { return slots_.size(); }

 private:
  std::vector<Addr> slots_;
  std::size_t head_ = 0;  // next push position
  std::size_t size_ = 0;
};

}  // namespace btbsim

#endif  // BTBSIM_RAS_HPP
