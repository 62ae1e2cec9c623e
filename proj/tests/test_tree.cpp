#include <sstream>

#include <gtest/gtest.h>

#include "dtk/tree.hpp"
#include "support/oracles.hpp"

using namespace dtk;

TEST(Parse, NestedTreeStructure) {
  const Tree t = parse_tree("(A (B W1) (C (D W2) (E W3)))");
  ASSERT_EQ(t.node_count(), 8u);
  EXPECT_EQ(t.label(0), "A");
  ASSERT_EQ(t.children(0).size(), 2u);
  EXPECT_EQ(t.label(t.children(0)[0]), "B");
  EXPECT_EQ(t.label(t.children(0)[1]), "C");
  EXPECT_TRUE(t.is_preterminal(1));
  EXPECT_FALSE(t.is_preterminal(0));
  EXPECT_TRUE(t.is_terminal(2));
  EXPECT_EQ(t.at(2).parent, 1u);
  EXPECT_EQ(t.subtree_end(3), 8u);
  EXPECT_EQ(t.subtree_end(1), 3u);
}

TEST(Parse, BareTokenIsSingleNode) {
  const Tree t = parse_tree("  word ");
  EXPECT_EQ(t.node_count(), 1u);
  EXPECT_EQ(t.label(0), "word");
  EXPECT_TRUE(productions(t).empty());
}

TEST(Parse, WhitespaceIsFreeForm) {
  EXPECT_EQ(parse_tree("(S\t(NP  John)\n (VP runs))"), parse_tree("(S (NP John) (VP runs))"));
}

TEST(Parse, LabelsAreCaseSensitive) {
  EXPECT_FALSE(parse_tree("(a b)") == parse_tree("(A b)"));
}

TEST(Parse, Errors) {
  auto reason = [](const char* text) {
    try {
      parse_tree(text);
    } catch (const ParseError& e) {
      return e.reason();
    }
    return std::string("no error");
  };
  EXPECT_EQ(reason(""), "empty input");
  EXPECT_EQ(reason("   "), "empty input");
  EXPECT_EQ(reason("(A (B c)"), "unbalanced parentheses");
  EXPECT_EQ(reason(")"), "unbalanced parentheses");
  EXPECT_EQ(reason("()"), "empty label");
  EXPECT_EQ(reason("(A ( ) b)"), "empty label");
  EXPECT_EQ(reason("(A b) c"), "trailing characters after tree");
  EXPECT_EQ(reason("a b"), "trailing characters after tree");
}

TEST(Parse, ErrorOffset) {
  try {
    parse_tree("(A b) x");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 6u);
  }
}

TEST(Parse, NodeLimit) {
  EXPECT_THROW(parse_tree("(A b c d)", 3), ParseError);
  EXPECT_NO_THROW(parse_tree("(A b c d)", 4));
}

TEST(Parse, DeepTreeNeedsNoRecursion) {
  std::string text;
  const int depth = 50000;
  for (int i = 0; i < depth; ++i) text += "(X ";
  text += "w";
  text.append(depth, ')');
  const Tree t = parse_tree(text);
  EXPECT_EQ(t.node_count(), static_cast<std::size_t>(depth) + 1);
  EXPECT_EQ(serialize_tree(t), text);
}

TEST(Serialize, CanonicalForm) {
  EXPECT_EQ(serialize_tree(parse_tree("( S ( NP John )( VP runs ) )")), "(S (NP John) (VP runs))");
  EXPECT_EQ(serialize_tree(parse_tree("w")), "w");
}

TEST(Serialize, RoundTripOnRandomTrees) {
  SplitMix64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Tree t = oracle::random_tree(rng, 1 + rng.bounded(30));
    const std::string s = serialize_tree(t);
    const Tree back = parse_tree(s);
    EXPECT_EQ(back, t);
    EXPECT_EQ(serialize_tree(back), s);
  }
}

TEST(Label, RejectsInvalidText) {
  EXPECT_THROW(Label(""), std::invalid_argument);
  EXPECT_THROW(Label("a b"), std::invalid_argument);
  EXPECT_THROW(Label("a(b"), std::invalid_argument);
  EXPECT_NO_THROW(Label("NP-SBJ=1"));
}

TEST(Builders, MatchParser) {
  const Tree built =
      Tree::node(Label("S"), {Tree::node(Label("NP"), {Tree::leaf(Label("I"))}),
                              Tree::node(Label("VP"), {Tree::leaf(Label("run")), Tree::leaf(Label("fast"))})});
  EXPECT_EQ(built, parse_tree("(S (NP I) (VP run fast))"));
}

TEST(Productions, PreorderListing) {
  const Tree t = parse_tree("(S (NP I) (VP (V run) fast))");
  const auto ps = productions(t);
  ASSERT_EQ(ps.size(), 4u);
  EXPECT_EQ(ps[0].second.to_string(), "S -> NP VP");
  EXPECT_EQ(ps[1].second.to_string(), "NP -> I");
  EXPECT_EQ(ps[2].second.to_string(), "VP -> V fast");
  EXPECT_EQ(ps[3].second.to_string(), "V -> run");
  EXPECT_TRUE(t.production(0) == t.production(0));
  EXPECT_FALSE(t.production(0) == t.production(1));
}

TEST(Subtree, ExtractsContiguousRange) {
  const Tree t = parse_tree("(A (B W1) (C (D W2) (E W3)))");
  EXPECT_EQ(serialize_tree(t.subtree(3)), "(C (D W2) (E W3))");
  EXPECT_EQ(serialize_tree(t.subtree(2)), "W1");
}

TEST(Corpus, SkipsCommentsAndCollectsErrors) {
  std::istringstream in("# header\n(A b)\n\n   \n(A (b)\nw\n  # indented comment\n(C d e)\n");
  const Corpus c = read_corpus(in);
  ASSERT_EQ(c.trees.size(), 3u);
  EXPECT_EQ(c.line_numbers, (std::vector<std::size_t>{2, 6, 8}));
  ASSERT_EQ(c.errors.size(), 1u);
  EXPECT_EQ(c.errors[0].line_number, 5u);
  EXPECT_NE(c.errors[0].message.find("unbalanced"), std::string::npos);
}
