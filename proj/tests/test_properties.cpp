#include <doctest.h>

#include "properties.hpp"

TEST_CASE("invariant properties hold on 500 random cases each") {
    for (const auto& p : test::properties()) {
        CAPTURE(p.name);
        CHECK(p.run(1, 500) == 0);
    }
}
