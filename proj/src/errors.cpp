#include "simalign/errors.hpp"

#include <exception>

namespace simalign {

namespace {

template <class E>
bool try_rethrow(const std::exception_ptr& ptr, const std::string& context) {
    try {
        std::rethrow_exception(ptr);
    } catch (const E& e) {
        throw E(context + ": " + e.what());
    } catch (...) {
    }
    return false;
}

}  // namespace

void rethrow_with_context(const std::string& context) {
    const auto ptr = std::current_exception();
    // Most-derived types first.
    try_rethrow<ParseError>(ptr, context);
    try_rethrow<ValidationError>(ptr, context);
    try_rethrow<RaggedRowsError>(ptr, context);
    try_rethrow<EmptyGroupError>(ptr, context);
    try_rethrow<ShapeMismatchError>(ptr, context);
    try_rethrow<TruncationError>(ptr, context);
    try_rethrow<LengthMismatchError>(ptr, context);
    try_rethrow<NonPositiveWeightError>(ptr, context);
    try_rethrow<DegenerateRangeError>(ptr, context);
    try_rethrow<AllZeroVarianceError>(ptr, context);
    try_rethrow<ZeroVarianceError>(ptr, context);
    try_rethrow<InsufficientDataError>(ptr, context);
    try_rethrow<SingularScatterError>(ptr, context);
    try_rethrow<SingularCovarianceError>(ptr, context);
    try_rethrow<NumericalError>(ptr, context);
    try_rethrow<InputError>(ptr, context);
    try_rethrow<IoError>(ptr, context);
    try_rethrow<Error>(ptr, context);
    std::rethrow_exception(ptr);
}

}  // namespace simalign
