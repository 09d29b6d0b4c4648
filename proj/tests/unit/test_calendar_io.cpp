#include "helpers.hpp"

#include "distress/calendar.hpp"
#include "distress/io.hpp"

using namespace distress;

TEST_CASE("dates parse, format and count days")
{
    const auto d = parse_date("2020-02-28");
    CHECK(format_date(d) == "2020-02-28");
    CHECK(format_date(add_days(d, 1)) == "2020-02-29");
    CHECK(format_date(add_days(d, 2)) == "2020-03-01");
    CHECK(days_between(parse_date("2019-12-31"), parse_date("2020-12-31")) == 366);
    CHECK(days_between(parse_date("2020-01-10"), parse_date("2020-01-01")) == -9);
    CHECK_ERRC(parse_date("2020-13-01"), Errc::InvalidArgument);
    CHECK_ERRC(parse_date("2021-02-29"), Errc::InvalidArgument);
    CHECK_ERRC(parse_date("20-01-01"), Errc::InvalidArgument);
    CHECK_ERRC(parse_date("yesterday"), Errc::InvalidArgument);
}

TEST_CASE("text files round-trip and hash")
{
    const auto dir = testing::scratch("io");
    io::write_text(dir / "a" / "b.txt", "hello\n");
    CHECK(io::read_text(dir / "a" / "b.txt") == "hello\n");
    CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(io::sha256_file(dir / "a" / "b.txt") == io::sha256_hex("hello\n"));
    CHECK_ERRC(io::read_text(dir / "missing.txt"), Errc::IoFailure);
}

TEST_CASE("CSV reading handles quotes and reports missing columns")
{
    const auto dir = testing::scratch("csv");
    io::write_text(dir / "t.csv", "name,value\n\"Smith, J\",1\n\"say \"\"hi\"\"\",2\r\n\nplain,3\n");
    const auto t = io::read_csv(dir / "t.csv");
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[0][0] == "Smith, J");
    CHECK(t.rows[1][0] == "say \"hi\"");
    CHECK(t.rows[1][1] == "2");
    CHECK(t.column("value") == 1);
    CHECK_ERRC(t.column("other"), Errc::InvalidArgument);
    CHECK(io::csv_escape("a,b") == "\"a,b\"");
    CHECK(io::csv_escape("plain") == "plain");
    io::write_text(dir / "bad.csv", "a,b\n\"open,1\n");
    CHECK_ERRC(io::read_csv(dir / "bad.csv"), Errc::InvalidArgument);
}
