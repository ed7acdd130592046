#include "latsteer/params.hpp"

#include <utility>

#include "latsteer/error.hpp"

namespace latsteer {

void Params::add(std::string name, Tensor value) {
    if (find(name)) throw ValidationError("duplicate parameter name '" + name + "'");
    entries_.push_back({std::move(name), std::move(value)});
}

std::size_t Params::scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
}

const NamedTensor* Params::find(std::string_view name) const {
    for (const auto& e : entries_) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

const Tensor& Params::at(std::string_view name) const {
    if (const NamedTensor* e = find(name)) return e->value;
    throw ValidationError("no parameter named '" + std::string(name) + "'");
}

Tensor& Params::at(std::string_view name) { return const_cast<Tensor&>(std::as_const(*this).at(name)); }

std::vector<Tensor> Params::tensors() const {
    std::vector<Tensor> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.value);
    return out;
}

std::vector<Tensor*> Params::pointers() {
    std::vector<Tensor*> out;
    out.reserve(entries_.size());
    for (auto& e : entries_) out.push_back(&e.value);
    return out;
}

bool Params::bit_equal(const Params& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].name != other.entries_[i].name) return false;
        if (!entries_[i].value.bit_equal(other.entries_[i].value)) return false;
    }
    return true;
}

}  // namespace latsteer
