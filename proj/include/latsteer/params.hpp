#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "latsteer/tensor.hpp"

namespace latsteer {

struct NamedTensor {
    std::string name;
    Tensor value;
};

// Ordered, named collection of tensors for one network. Order is the
// documented initialization and serialization order.
class Params {
public:
    void add(std::string name, Tensor value);

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t scalar_count() const;

    const NamedTensor& operator[](std::size_t i) const { return entries_[i]; }
    NamedTensor& operator[](std::size_t i) { return entries_[i]; }
    const Tensor& at(std::string_view name) const;
    Tensor& at(std::string_view name);
    const NamedTensor* find(std::string_view name) const;

    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }
    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }

    std::vector<Tensor> tensors() const;
    std::vector<Tensor*> pointers();

    // Names, shapes and payload bits all equal.
    bool bit_equal(const Params& other) const;

private:
    std::vector<NamedTensor> entries_;
};

}  // namespace latsteer
