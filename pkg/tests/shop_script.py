"""Scripted provider rules for the shop fixture, shared across test modules.

Rules key on the stage marker lines of the prompt catalog, so any drift in
prompt construction fails loudly (the scripted provider runs in strict mode).
"""

import json

from autoeda.llm.providers import ScriptedRule

COLUMN_REPLIES = {
    "users": {
        "id": "Unique identifier of the user.",
        "name": "Display name of the user.",
        "email": "Contact email address.",
        "country": "Two-letter country code of the user.",
        "created_at": "Date the account was created.",
    },
    "products": {
        "id": "Unique identifier of the product.",
        "name": "Product name.",
        "price": "Unit price in dollars.",
        "category": "Product category label.",
        "stock": "Units currently in stock.",
    },
    "orders": {
        "id": "Unique identifier of the order.",
        "user_id": "Identifier of the user who placed the order.",
        "amount": "Order total in dollars.",
        "status": "Fulfilment status of the order.",
        "created_at": "Date the order was placed.",
    },
}

TABLE_BLOCK_REPLIES = {
    "users": "Account holders with identity and contact details.",
    "products": "Catalog items with price, category, and stock level.",
    "orders": "Purchases linking users to amounts, status, and dates.",
}

TABLE_REDUCE_REPLIES = {
    "users": "Registered customers with contact and location data.",
    "products": "The product catalog with pricing and availability.",
    "orders": "Customer purchase records with amount and status.",
}

TABLE_PROFILES = {
    "users": {
        "chosen_primary_key": "id",
        "key_attributes": ["id", "name", "email", "country"],
        "table_type": "dimension",
        "main_entity": "user",
        "nl_description": "Registered customers of the shop.",
    },
    "products": {
        "chosen_primary_key": "id",
        "key_attributes": ["id", "name", "price", "category"],
        "table_type": "dimension",
        "main_entity": "product",
        "nl_description": "Items available for sale.",
    },
    "orders": {
        "chosen_primary_key": "id",
        "key_attributes": ["id", "user_id", "amount", "status"],
        "table_type": "fact",
        "main_entity": "order",
        "nl_description": "Orders placed by customers.",
    },
}

SEEDED_EDGE = {
    "referencing_table": "orders",
    "referenced_table": "users",
    "foreign_key_column": "user_id",
    "primary_key_column": "id",
    "relationship_type": "1:N",
}

ENTITIES = [
    {
        "name": "Customer Orders",
        "summary": "Customers and the orders they place over time.",
        "key_attributes": ["id", "user_id", "amount"],
        "member_tables": ["users", "orders"],
    },
    {
        "name": "Product Catalog",
        "summary": "The sellable products and their pricing.",
        "key_attributes": ["id", "price", "category"],
        "member_tables": ["products"],
    },
]

DB_SUMMARY = {
    "purpose": "Track retail sales activity from first signup to fulfilment.",
    "domain": "retail",
    "business_impact": "Lets teams monitor revenue, customers, and stock.",
    "real_world_example": "A shop reviewing monthly revenue by product category.",
    "user_friendly_description": "A small retail database covering users, products, and orders.",
    "short_summary": "Retail users, products, and orders",
}

SUGGESTED = [
    {"text": "How many orders are in Customer Orders per user?", "analysis_type": "descriptive"},
    {"text": "Does country relate to order amounts in Customer Orders?", "analysis_type": "inferential"},
    {"text": "Why did cancelled orders increase last quarter?", "analysis_type": "diagnostic"},
    {"text": "How will Product Catalog stock levels develop next month?", "analysis_type": "predictive"},
    {"text": "Which product categories should the shop restock first?", "analysis_type": "prescriptive"},
]

# The five fixture questions with their scripted pipeline outputs.
QUESTIONS = [
    {
        "question": "Which product is the best?",
        "clarify": {
            "main_concepts": ["product", "best"],
            "ambiguities": [
                {"concept": "best", "explanation": "interpreted as the highest total order revenue"}
            ],
            "refined_task": "Which product name has the highest total order amount?",
            "detailed_description": "Rank products by summed order amounts and return the top name.",
        },
        "plan": {"single_sql_answerable": True, "subtasks": []},
        "filter": [{"table": "orders", "columns": ["amount", "status"]}],
        "sql": "SELECT status, SUM(amount) AS total FROM orders GROUP BY status ORDER BY total DESC LIMIT 3",
    },
    {
        "question": "How many orders has each user placed?",
        "clarify": {
            "main_concepts": ["orders", "user"],
            "ambiguities": [],
            "refined_task": "Count orders per user name.",
            "detailed_description": "Join orders to users and count rows per user.",
        },
        "plan": {"single_sql_answerable": True, "subtasks": []},
        "filter": [
            {"table": "orders", "columns": ["id", "user_id"]},
            {"table": "users", "columns": ["id", "name"]},
        ],
        "sql": (
            "SELECT users.name, COUNT(orders.id) AS order_count FROM orders "
            "JOIN users ON orders.user_id = users.id GROUP BY users.name"
        ),
    },
    {
        "question": "What is the total revenue by product category?",
        "clarify": {
            "main_concepts": ["revenue", "product category"],
            "ambiguities": [
                {"concept": "revenue", "explanation": "interpreted as the sum of product prices in stock"}
            ],
            "refined_task": "Sum product price per category.",
            "detailed_description": "Group products by category and total the prices.",
        },
        "plan": {"single_sql_answerable": True, "subtasks": []},
        "filter": [{"table": "products", "columns": ["price", "category"]}],
        "sql": "SELECT category, SUM(price) AS total_price FROM products GROUP BY category",
    },
    {
        "question": "Compare order volume and revenue by country.",
        "clarify": {
            "main_concepts": ["order volume", "revenue", "country"],
            "ambiguities": [],
            "refined_task": "Report order count and summed amount per user country.",
            "detailed_description": "Two aggregates per country: order count and total amount.",
        },
        "plan": {
            "single_sql_answerable": False,
            "subtasks": [
                {"description": "Count orders per country", "detail": "Join orders to users, count per country."},
                {"description": "Total order amount per country", "detail": "Join orders to users, sum amount per country."},
            ],
        },
        "filter": [
            {"table": "orders", "columns": ["id", "user_id", "amount"]},
            {"table": "users", "columns": ["id", "country"]},
        ],
        "subtask_sql": [
            (
                "SELECT users.country, COUNT(orders.id) AS order_count FROM orders "
                "JOIN users ON orders.user_id = users.id GROUP BY users.country"
            ),
            (
                "SELECT users.country, SUM(orders.amount) AS total_amount FROM orders "
                "JOIN users ON orders.user_id = users.id GROUP BY users.country"
            ),
        ],
    },
    {
        "question": "List pending orders with user names.",
        "clarify": {
            "main_concepts": ["pending orders", "user names"],
            "ambiguities": [],
            "refined_task": "List order id, amount, and user name for orders with status pending.",
            "detailed_description": "Filter orders by status pending and join user names.",
        },
        "plan": {"single_sql_answerable": True, "subtasks": []},
        "filter": [
            {"table": "orders", "columns": ["id", "amount", "status", "user_id"]},
            {"table": "users", "columns": ["id", "name"]},
        ],
        "sql": (
            "SELECT orders.id, users.name, orders.amount FROM orders "
            "JOIN users ON orders.user_id = users.id WHERE orders.status = 'pending'"
        ),
    },
]


UNANSWERABLE = {
    "question": "What is the weather tomorrow?",
    "clarify": {
        "main_concepts": ["weather"],
        "ambiguities": [],
        "refined_task": "Forecast tomorrow's weather.",
        "detailed_description": "Weather forecasting from a retail schema.",
    },
    "plan": {"single_sql_answerable": True, "subtasks": []},
}

BROKEN = {
    "question": "Show the broken report.",
    "clarify": {
        "main_concepts": ["broken report"],
        "ambiguities": [],
        "refined_task": "Produce the broken report.",
        "detailed_description": "A report whose SQL never repairs.",
    },
    "plan": {"single_sql_answerable": True, "subtasks": []},
    "filter": [{"table": "orders", "columns": ["id", "amount"]}],
    "sql": "SELECT id, amount FROM orders LIMIT 'abc'",
}


def extra_rules() -> list[ScriptedRule]:
    rules = []
    for spec in (UNANSWERABLE, BROKEN):
        rules.append(
            ScriptedRule(
                f"### CLARIFY\nUser question: {spec['question']}", json.dumps(spec["clarify"])
            )
        )
        refined = spec["clarify"]["refined_task"]
        rules.append(
            ScriptedRule(f"### DECOMPOSE\nRefined task: {refined}", json.dumps(spec["plan"]))
        )
    # Unanswerable: the fine-grained filter keeps nothing.
    rules.append(
        ScriptedRule(f"Task: {UNANSWERABLE['clarify']['refined_task']}\nCandidate tables", "[]")
    )
    # Broken: the SQL trips a type error at execution and repairs never fix it.
    broken_task = BROKEN["clarify"]["refined_task"]
    rules.append(ScriptedRule(f"Task: {broken_task}\nCandidate tables", json.dumps(BROKEN["filter"])))
    rules.append(ScriptedRule(f"### SQL-GENERATE\nTask: {broken_task}", BROKEN["sql"]))
    rules.append(ScriptedRule("### SQL-REPAIR", "SELECT forever_missing FROM orders"))
    return rules


def hdc_rules() -> list[ScriptedRule]:
    """Rules covering the full context build over the shop fixture."""
    rules = []
    for table, reply in COLUMN_REPLIES.items():
        rules.append(ScriptedRule(f"### COLUMN-BATCH {table} block=0", json.dumps(reply)))
    for table, reply in TABLE_BLOCK_REPLIES.items():
        rules.append(ScriptedRule(f"### TABLE-BLOCK {table} block=0", reply))
    for table, reply in TABLE_REDUCE_REPLIES.items():
        rules.append(ScriptedRule(f"### TABLE-REDUCE {table}\n", reply))
    for table, profile in TABLE_PROFILES.items():
        rules.append(ScriptedRule(f"### TABLE-PROFILE {table}\n", json.dumps(profile)))
    rules.append(ScriptedRule("### TABLE-RELATIONSHIPS orders", json.dumps([SEEDED_EDGE])))
    rules.append(ScriptedRule("### TABLE-RELATIONSHIPS users", json.dumps([SEEDED_EDGE])))
    rules.append(ScriptedRule("### TABLE-RELATIONSHIPS products", "[]"))
    rules.append(ScriptedRule("### ENTITY-EXTRACTION", json.dumps(ENTITIES)))
    rules.append(ScriptedRule("### DATABASE-SUMMARY main", json.dumps(DB_SUMMARY)))
    rules.append(ScriptedRule("### SUGGESTED-QUESTIONS main", json.dumps(SUGGESTED)))
    return rules


def question_rules() -> list[ScriptedRule]:
    """Rules covering clarification, decomposition, filtering, and SQL generation."""
    rules = []
    for spec in QUESTIONS:
        question = spec["question"]
        refined = spec["clarify"]["refined_task"]
        rules.append(
            ScriptedRule(f"### CLARIFY\nUser question: {question}", json.dumps(spec["clarify"]))
        )
        rules.append(
            ScriptedRule(f"### DECOMPOSE\nRefined task: {refined}", json.dumps(spec["plan"]))
        )
        if spec["plan"]["single_sql_answerable"]:
            rules.append(
                ScriptedRule(f"Task: {refined}\nCandidate tables", json.dumps(spec["filter"]))
            )
            rules.append(ScriptedRule(f"### SQL-GENERATE\nTask: {refined}", spec["sql"]))
        else:
            for subtask, sql in zip(spec["plan"]["subtasks"], spec["subtask_sql"]):
                detail_task = subtask["description"]
                rules.append(
                    ScriptedRule(f"Task: {detail_task}\nCandidate tables", json.dumps(spec["filter"]))
                )
                rules.append(ScriptedRule(f"### SQL-GENERATE\nTask: {detail_task}", sql))
    rules.append(ScriptedRule("### CHART-VERIFY", json.dumps({"appropriate": True, "alternative": None})))
    return rules


def all_rules() -> list[ScriptedRule]:
    return hdc_rules() + question_rules() + extra_rules()


def write_rules_file(path) -> None:
    data = {
        "strict": True,
        "rules": [
            {"contains": r.contains, "response": r.response, "output_tokens": r.output_tokens}
            for r in all_rules()
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1)
