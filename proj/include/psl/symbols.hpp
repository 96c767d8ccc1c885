#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "psl/error.hpp"

namespace psl {

/// Interned constant symbol. Ids are dense and assigned in first-seen order.
using Sym = int32_t;

class SymbolTable {
public:
    Sym intern(std::string_view text) {
        auto it = index_.find(std::string(text));
        if (it != index_.end()) return it->second;
        Sym id = static_cast<Sym>(names_.size());
        names_.emplace_back(text);
        index_.emplace(names_.back(), id);
        return id;
    }

    /// Returns -1 when the symbol was never interned.
    Sym find(std::string_view text) const {
        auto it = index_.find(std::string(text));
        return it == index_.end() ? Sym(-1) : it->second;
    }

    const std::string& name(Sym id) const {
        if (id < 0 || id >= static_cast<Sym>(names_.size())) {
            throw Error("unknown symbol id " + std::to_string(id));
        }
        return names_[static_cast<size_t>(id)];
    }

    int32_t size() const { return static_cast<int32_t>(names_.size()); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, Sym> index_;
};

} // namespace psl
