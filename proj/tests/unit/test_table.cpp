#include <gtest/gtest.h>

#include <algorithm>

#include "explore/table.hpp"
#include "random_tables.hpp"

using namespace explore;

namespace {

ErrorCode parse_error(std::string_view bytes, const ParseOptions& options = {}) {
    try {
        parse_csv(bytes, options);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error for input";
    return ErrorCode::internal_error;
}

}  // namespace

TEST(ParseCsv, InfersIntegerAndText) {
    const auto t = parse_csv("a,b\n1,x\n2,y");
    ASSERT_EQ(t.n_rows(), 2u);
    EXPECT_EQ(t.column("a").dtype(), DType::integer);
    EXPECT_EQ(t.column("a")[1], Value{std::int64_t{2}});
    EXPECT_EQ(t.column("b").dtype(), DType::text);
    EXPECT_EQ(t.column("b")[0], Value{std::string("x")});
}

TEST(ParseCsv, NaTokenBecomesMissing) {
    const auto t = parse_csv("a\n1\nNA");
    EXPECT_EQ(t.column("a").dtype(), DType::integer);
    EXPECT_TRUE(is_missing(t.column("a")[1]));
}

TEST(ParseCsv, CustomNaTokens) {
    ParseOptions options;
    options.na_tokens = {"-", ""};
    const auto t = parse_csv("a\n1\n-\nNA", options);
    EXPECT_EQ(t.column("a").dtype(), DType::text);
    EXPECT_TRUE(is_missing(t.column("a")[1]));
    EXPECT_EQ(t.column("a")[2], Value{std::string("NA")});
}

TEST(ParseCsv, EmptyInput) { EXPECT_EQ(parse_error(""), ErrorCode::empty_input); }

TEST(ParseCsv, HeaderOnlyIsEmpty) { EXPECT_EQ(parse_error("a,b\n"), ErrorCode::empty_input); }

TEST(ParseCsv, RaggedRows) { EXPECT_EQ(parse_error("a,b\n1,2\n3\n"), ErrorCode::ragged_rows); }

TEST(ParseCsv, InvalidUtf8) { EXPECT_EQ(parse_error("a\n\xff\xfe\n"), ErrorCode::encoding_error); }

TEST(ParseCsv, SpreadsheetRejected) {
    EXPECT_EQ(parse_error(std::string("PK\x03\x04rest", 8)), ErrorCode::unsupported_format);
}

TEST(ParseCsv, EmptyHeaderRejected) { EXPECT_EQ(parse_error("a,\n1,2\n"), ErrorCode::invalid_header); }

TEST(ParseCsv, DuplicateHeaderRejected) { EXPECT_EQ(parse_error("a,a\n1,2\n"), ErrorCode::invalid_header); }

TEST(ParseCsv, ByteOrderMarkAndCrlf) {
    const auto t = parse_csv("\xEF\xBB\xBFx,y\r\n1,2\r\n3,4\r\n");
    EXPECT_EQ(t.columns()[0].name(), "x");
    EXPECT_EQ(t.n_rows(), 2u);
    EXPECT_EQ(t.column("y")[1], Value{std::int64_t{4}});
}

TEST(ParseCsv, QuotedFields) {
    const auto t = parse_csv("a,b\n\"he,llo\",\"say \"\"hi\"\"\"\n\"two\nlines\",x\n");
    EXPECT_EQ(t.column("a")[0], Value{std::string("he,llo")});
    EXPECT_EQ(t.column("b")[0], Value{std::string("say \"hi\"")});
    EXPECT_EQ(t.column("a")[1], Value{std::string("two\nlines")});
}

TEST(ParseCsv, NoHeaderNamesColumns) {
    ParseOptions options;
    options.has_header = false;
    const auto t = parse_csv("1,x\n2,y\n", options);
    EXPECT_EQ(t.columns()[0].name(), "col1");
    EXPECT_EQ(t.columns()[1].name(), "col2");
    EXPECT_EQ(t.n_rows(), 2u);
}

TEST(ParseCsv, TabDelimiter) {
    ParseOptions options;
    options.delimiter = '\t';
    const auto t = parse_csv("a\tb\n1.5\t2020-01-31\n", options);
    EXPECT_EQ(t.column("a").dtype(), DType::real);
    EXPECT_EQ(t.column("b").dtype(), DType::date);
}

TEST(ParseCsv, CascadeOrder) {
    const auto t = parse_csv("i,r,b,d,t,m\n1,1,true,2020-02-29,2020-02-30,1\n-2,2.5,FALSE,1999-12-31,x,true\n");
    EXPECT_EQ(t.column("i").dtype(), DType::integer);
    EXPECT_EQ(t.column("r").dtype(), DType::real);
    EXPECT_EQ(t.column("b").dtype(), DType::boolean);
    EXPECT_EQ(t.column("d").dtype(), DType::date);
    EXPECT_EQ(t.column("t").dtype(), DType::text);
    EXPECT_EQ(t.column("m").dtype(), DType::text);
}

TEST(ParseCsv, NumericOneZeroStaysInteger) {
    EXPECT_EQ(parse_csv("f\n0\n1\n").column("f").dtype(), DType::integer);
}

TEST(ToCsv, WritesIntegers) {
    const Table t("t", {Column("a", DType::integer, {std::int64_t{1}, std::int64_t{2}})});
    EXPECT_EQ(to_csv(t), "a\n1\n2\n");
}

TEST(ToCsv, QuotesDelimiter) {
    const Table t("t", {Column("a", DType::text, {std::string("he,llo")})});
    EXPECT_EQ(to_csv(t), "a\n\"he,llo\"\n");
}

TEST(Schema, CountsMissingAndDistinct) {
    const Table t("t", {Column("x", DType::integer, {std::int64_t{1}, std::int64_t{2}, std::int64_t{2}, Value{}})});
    const auto s = schema(t);
    ASSERT_EQ(s.columns.size(), 1u);
    EXPECT_EQ(s.columns[0].dtype, DType::integer);
    EXPECT_EQ(s.columns[0].n_missing, 1u);
    EXPECT_EQ(s.columns[0].n_distinct, 2u);
}

TEST(Schema, ZeroRowColumn) {
    const Table t("t", {Column("x", DType::real, {})});
    const auto s = schema(t);
    EXPECT_EQ(s.n_rows, 0u);
    EXPECT_EQ(s.columns[0].n_missing, 0u);
    EXPECT_EQ(s.columns[0].n_distinct, 0u);
}

TEST(Table, RejectsMismatchedColumns) {
    EXPECT_THROW(Table("t", {Column("a", DType::integer, {std::int64_t{1}}), Column("b", DType::integer, {})}),
                 Error);
    EXPECT_THROW(Column("a", DType::integer, {std::string("x")}), Error);
}

TEST(TableProperty, CsvRoundTrip) {
    oracle::Rng rng(101);
    for (int i = 0; i < 300; ++i) {
        const auto t = oracle::random_table(rng);
        const auto back = parse_csv(to_csv(t), {}, t.name());
        ASSERT_EQ(back, t) << to_csv(t);
    }
}

TEST(TableProperty, InferenceIsOrderInsensitive) {
    oracle::Rng rng(102);
    for (int i = 0; i < 200; ++i) {
        const auto t = oracle::random_table(rng);
        std::vector<std::size_t> perm(t.n_rows());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const auto shuffled = parse_csv(to_csv(t.take_rows(perm)));
        for (std::size_t j = 0; j < t.n_columns(); ++j) {
            ASSERT_EQ(shuffled.columns()[j].dtype(), t.columns()[j].dtype());
        }
    }
}

TEST(TableProperty, MissingPlusPresentCoversGrid) {
    oracle::Rng rng(103);
    for (int i = 0; i < 200; ++i) {
        const auto t = parse_csv(to_csv(oracle::random_table(rng)));
        std::size_t total = 0;
        for (const auto& c : t.columns()) {
            total += static_cast<std::size_t>(std::count_if(c.cells().begin(), c.cells().end(),
                                                            [](const Value& v) { return !is_missing(v); }));
        }
        for (const auto& c : schema(t).columns) {
            total += c.n_missing;
        }
        ASSERT_EQ(total, t.n_columns() * t.n_rows());
    }
}
