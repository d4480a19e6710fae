#include "tristrat/agents.hpp"

namespace tristrat {

namespace {

constexpr const char* kAnalystPreamble =
    "You are a member of an equity research desk that builds a weekly long-only portfolio. "
    "Be factual, cite the evidence you rely on, and do not speculate beyond the data provided.";

} // namespace

PromptTemplates PromptTemplates::defaults() {
    PromptTemplates t;

    t.news = {"news", std::string(kAnalystPreamble) + " Your specialty is market news.",
              "Stock: {{stock}} (portfolio week {{week}})\n\n"
              "Below are the news items published about this stock during the previous week. "
              "Summarize the events that matter for the stock over the coming week, judge whether the coverage "
              "is positive, negative or mixed, and say how broad and lasting the impact is likely to be. "
              "If there is no news, say so and describe what that absence implies.\n\n"
              "NEWS:\n{{input}}"};

    t.tech = {"tech", std::string(kAnalystPreamble) + " Your specialty is technical analysis.",
              "Stock: {{stock}} (portfolio week {{week}})\n\n"
              "Below are daily closing prices with SMA, ATR, RSI, MACD and Bollinger Band readings for the four "
              "weeks before the portfolio week. Describe the trend, momentum and volatility regime, note any "
              "overbought or oversold conditions and band breakouts, and state the short-term outlook.\n\n"
              "PRICE AND INDICATORS:\n{{input}}"};

    t.fund = {"fund", std::string(kAnalystPreamble) + " Your specialty is company fundamentals.",
              "Stock: {{stock}} (portfolio week {{week}})\n\n"
              "Below are the income statement, balance sheet and cash flow figures from the most recently "
              "released fiscal quarters, oldest first. Assess financial stability, the trend across quarters, "
              "and the company's capacity for growth.\n\n"
              "FUNDAMENTALS:\n{{input}}"};

    t.score = {"score",
               "You are a portfolio analyst who turns research notes into comparable scores. "
               "Reply with a single JSON object inside a ```json fenced block and nothing that contradicts it.",
               "Stock: {{stock}} (portfolio week {{week}})\n\n"
               "Read the research overview and score the stock from 1 to 10 on each dimension:\n"
               "- financial_health: current financial stability; higher means stronger fundamentals and lower "
               "short-term risk.\n"
               "- growth_potential: capacity for future expansion; higher means stronger long-term earnings "
               "potential.\n"
               "- news_sentiment: polarity of recent coverage; higher means more positive.\n"
               "- news_impact: breadth and duration of news influence; higher means more sustained impact.\n"
               "- price_momentum: recent price trend; higher means a stronger, steadier uptrend.\n"
               "- volatility_risk: recent price fluctuation; higher means MORE volatile and less stable.\n\n"
               "Every score must be an integer from 1 to 10. Output format:\n"
               "```json\n{\"financial_health\": 0, \"growth_potential\": 0, \"news_sentiment\": 0, "
               "\"news_impact\": 0, \"price_momentum\": 0, \"volatility_risk\": 0, \"rationale\": \"...\"}\n```\n\n"
               "OVERVIEW:\n{{overview}}"};

    t.select = {"select",
                "You are the portfolio manager. You allocate capital for one week across the candidate stocks "
                "following the current selection strategy. Unallocated capital is held as cash.",
                "Portfolio week {{week}}.\n\n"
                "CURRENT STRATEGY:\n{{strategy}}\n\n"
                "Candidate tickers: {{candidates}}\n\n"
                "Rules: choose at most {{max_positions}} stocks; each weight is a fraction between 0 and 1; the "
                "weights must sum to at most 1; only candidate tickers are allowed. Prefer stocks that score well "
                "on the dimensions the strategy emphasises.\n\n"
                "Reply with a ```json fenced block holding a single object mapping ticker to weight, for example "
                "{\"AAA\": 0.3, \"BBB\": 0.2}. An empty object means all cash.\n\n"
                "SCORES:\n{{scores}}"};

    t.strategy = {"strategy",
                  "You are the head of strategy. Each week you review how the scored candidates actually performed "
                  "and revise the natural-language selection strategy the portfolio manager follows. Keep what has "
                  "worked, change what has not, and avoid erratic swings.",
                  "Week {{week}} has closed. Write the strategy for week {{next_week}}.\n\n"
                  "STRATEGY USED THIS WEEK:\n{{strategy}}\n\n"
                  "PORTFOLIO HELD THIS WEEK:\n{{portfolio}}\n\n"
                  "SCORES VERSUS REALIZED RETURNS (all candidates):\n{{table}}\n\n"
                  "PAST STRATEGIES AND OUTCOMES (up to {{history_capacity}} weeks, oldest first):\n{{history}}\n\n"
                  "Identify which score dimensions separated the winners from the losers, then reply with the "
                  "revised strategy as a short paragraph of plain text. Do not include anything else."};
    return t;
}

const PromptTemplate& PromptTemplates::for_kind(AnalysisKind kind) const {
    switch (kind) {
        case AnalysisKind::News: return news;
        case AnalysisKind::Tech: return tech;
        case AnalysisKind::Fund: return fund;
    }
    return news;
}

} // namespace tristrat
