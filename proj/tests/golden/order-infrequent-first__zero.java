File file = new File(path);
BufferedReader br = new BufferedReader(new FileReader(file));
String line = br.readLine().trim();
// parse simple name to fully qualified name
// the fully qualified name of "br" is