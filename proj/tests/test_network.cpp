#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "srtlab/network.hpp"

using srtlab::LiabilityNetwork;
using srtlab::LoanRecord;

namespace {

LiabilityNetwork random_network(std::mt19937_64& rng, int n, int n_loans) {
    LiabilityNetwork net(n);
    std::uniform_int_distribution<int> bank(0, n - 1);
    std::uniform_real_distribution<double> amount(0.1, 20.0);
    for (int k = 0; k < n_loans; ++k) {
        int i = bank(rng);
        int j = bank(rng);
        if (i == j) continue;
        net.book_loan({k + 1, i, j, amount(rng)});
    }
    return net;
}

} // namespace

TEST_CASE("remove_liability zeroes the edge and drops its loans") {
    LiabilityNetwork net(2);
    net.book_loan({1, 0, 1, 10.0});
    auto removed = net.remove_liability(0, 1);
    CHECK(removed.liability(0, 1) == 0.0);
    CHECK(removed.loans().empty());
    CHECK(removed.total_volume() == 0.0);
    // input untouched
    CHECK(net.liability(0, 1) == 10.0);
}

TEST_CASE("remove_liability is idempotent on a zero entry") {
    LiabilityNetwork net(3);
    net.book_loan({1, 0, 1, 5.0});
    auto removed = net.remove_liability(1, 2);
    CHECK(removed.liability(0, 1) == 5.0);
    CHECK(removed.loans().size() == 1);
}

TEST_CASE("remove_liability leaves other entries untouched") {
    std::mt19937_64 rng(42);
    auto net = random_network(rng, 3, 8);
    auto removed = net.remove_liability(0, 1);
    auto expected = oracle::to_dense(net);
    expected[0][1] = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(removed.liability(i, j) == expected[i][j]);
}

TEST_CASE("remove_liability rejects bad indices") {
    LiabilityNetwork net(2);
    CHECK_THROWS_AS(net.remove_liability(0, 5), std::out_of_range);
}

TEST_CASE("without_loan on the only loan yields the zero matrix") {
    LiabilityNetwork net(3);
    net.book_loan({7, 1, 0, 5.0});
    auto out = net.without_loan(7);
    CHECK(out.total_volume() == 0.0);
    CHECK(out.loans().empty());
}

TEST_CASE("with_loan of principal zero changes nothing") {
    LiabilityNetwork net(2);
    net.book_loan({1, 0, 1, 3.0});
    auto out = net.with_loan({2, 1, 0, 0.0});
    CHECK(out.total_volume() == net.total_volume());
    CHECK(out.loans().size() == 1);
}

TEST_CASE("without_loan rejects unknown ids") {
    LiabilityNetwork net(2);
    CHECK_THROWS_AS(net.without_loan(99), std::invalid_argument);
}

TEST_CASE("with_loan round trip restores the matrix exactly") {
    std::mt19937_64 rng(7);
    auto net = random_network(rng, 4, 12);
    for (const auto& loan : net.loans()) {
        auto round_trip = net.without_loan(loan.id).with_loan(loan);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                CHECK(std::abs(round_trip.liability(i, j) - net.liability(i, j)) <= 1e-12);
    }
}

TEST_CASE("total_volume matches naive double loop on random matrices") {
    std::mt19937_64 rng(123);
    for (int rep = 0; rep < 20; ++rep) {
        auto net = random_network(rng, 5, 15);
        CHECK(net.total_volume() == doctest::Approx(oracle::naive_volume(net)).epsilon(1e-14));
    }
}

TEST_CASE("total_volume trivia") {
    LiabilityNetwork net(2);
    CHECK(net.total_volume() == 0.0);
    net.book_loan({1, 0, 1, 10.0});
    net.book_loan({2, 1, 0, 5.0});
    CHECK(net.total_volume() == 15.0);
}

TEST_CASE("total_volume is additive under with_loan") {
    std::mt19937_64 rng(5);
    auto net = random_network(rng, 4, 6);
    LoanRecord extra{100, 2, 3, 4.5};
    CHECK(net.with_loan(extra).total_volume() ==
          doctest::Approx(net.total_volume() + extra.principal).epsilon(1e-14));
}

TEST_CASE("ledger/matrix consistency survives random operation sequences") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> op(0, 2);
    std::uniform_int_distribution<int> bank(0, 4);
    std::uniform_real_distribution<double> amount(0.1, 10.0);
    srtlab::LoanId next_id = 1000;

    auto net = random_network(rng, 5, 10);
    for (int step = 0; step < 200; ++step) {
        switch (op(rng)) {
        case 0: {
            int i = bank(rng), j = bank(rng);
            if (i != j) net = net.remove_liability(i, j);
            break;
        }
        case 1:
            if (!net.loans().empty()) {
                std::uniform_int_distribution<std::size_t> pick(0, net.loans().size() - 1);
                net = net.without_loan(net.loans()[pick(rng)].id);
            }
            break;
        default: {
            int i = bank(rng), j = bank(rng);
            if (i != j) net = net.with_loan({next_id++, i, j, amount(rng)});
            break;
        }
        }
        REQUIRE(net.consistent());
    }
}

TEST_CASE("remove_liability equals iterated without_loan over the edge") {
    std::mt19937_64 rng(9);
    auto net = random_network(rng, 4, 20);
    auto direct = net.remove_liability(1, 2);
    auto iterated = net;
    for (bool again = true; again;) {
        again = false;
        for (const auto& loan : iterated.loans()) {
            if (loan.debtor == 1 && loan.creditor == 2) {
                iterated = iterated.without_loan(loan.id);
                again = true;
                break;
            }
        }
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(std::abs(iterated.liability(i, j) - direct.liability(i, j)) <= 1e-9);
}
