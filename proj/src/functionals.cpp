#include "malcal/functionals.hpp"

#include "malcal/errors.hpp"

namespace malcal {

RandomVariableFn::RandomVariableFn(int horizon, Eval eval, std::string label)
    : horizon_(horizon), eval_(std::move(eval)), label_(std::move(label)) {
    if (horizon_ < 0) throw ValidationError("random variable horizon must be nonnegative");
    if (!eval_) throw ValidationError("random variable needs an evaluation map");
}

double RandomVariableFn::operator()(Outcome outcome) const {
    if (static_cast<int>(outcome.size()) < horizon_) {
        throw ValidationError("outcome has " + std::to_string(outcome.size()) +
                              " coordinates, random variable '" + label_ + "' needs " +
                              std::to_string(horizon_));
    }
    return eval_(outcome.first(static_cast<std::size_t>(horizon_)));
}

DiscreteProcessFn::DiscreteProcessFn(std::vector<RandomVariableFn> components, bool predictable)
    : components_(std::move(components)), predictable_(predictable) {
    const int m = horizon();
    if (m < 1) throw ValidationError("process needs at least one component");
    for (const auto& c : components_) {
        if (c.horizon() > m) {
            throw ValidationError("process component reads beyond the process horizon");
        }
    }
}

const RandomVariableFn& DiscreteProcessFn::component(int i) const {
    if (i < 1 || i > horizon()) {
        throw std::out_of_range("process component " + std::to_string(i) + " outside 1.." +
                                std::to_string(horizon()));
    }
    return components_[static_cast<std::size_t>(i - 1)];
}

}  // namespace malcal
