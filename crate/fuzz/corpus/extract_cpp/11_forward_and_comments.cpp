// a leading comment
class Node;
class Graph;

/* block
   comment */
class Node {
  const char* label = "{ not a brace }";
  Node* next; // trailing
};

class Graph {
public:
  void add(Node* n) { if (n) { count++; } }
private:
  int count;
};
