#pragma once

#include <stdexcept>
#include <utility>
#include <variant>

namespace servofunnel {

/// Value-or-error holder for operations whose failure is an expected,
/// reportable outcome (funnel violation, Newton divergence) rather than a
/// programming or configuration error.
template <typename T, typename E>
class Outcome {
public:
    Outcome(T value) : storage_(std::in_place_index<0>, std::move(value)) {}
    Outcome(E error) : storage_(std::in_place_index<1>, std::move(error)) {}

    [[nodiscard]] bool has_value() const noexcept { return storage_.index() == 0; }
    explicit operator bool() const noexcept { return has_value(); }

    [[nodiscard]] const T& value() const& {
        if (!has_value()) throw std::logic_error("Outcome::value() called on an error");
        return std::get<0>(storage_);
    }
    [[nodiscard]] T&& value() && {
        if (!has_value()) throw std::logic_error("Outcome::value() called on an error");
        return std::get<0>(std::move(storage_));
    }
    [[nodiscard]] const E& error() const& {
        if (has_value()) throw std::logic_error("Outcome::error() called on a value");
        return std::get<1>(storage_);
    }

    const T& operator*() const& { return value(); }
    const T* operator->() const { return &value(); }

private:
    std::variant<T, E> storage_;
};

}  // namespace servofunnel
